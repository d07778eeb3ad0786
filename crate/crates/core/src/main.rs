fn main() {
    std::process::exit(ym2::cli::run(std::env::args_os()));
}
