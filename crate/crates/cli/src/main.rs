fn main() {
    std::process::exit(faultcast_cli::run(std::env::args_os()));
}
