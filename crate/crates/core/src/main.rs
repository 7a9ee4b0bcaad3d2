fn main() {
    std::process::exit(qam::cli::run(std::env::args_os()));
}
