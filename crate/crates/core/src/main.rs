fn main() {
    std::process::exit(chainsys::cli::run(std::env::args_os()));
}
