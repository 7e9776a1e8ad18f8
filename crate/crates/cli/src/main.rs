fn main() {
    std::process::exit(pa_cli::run(std::env::args_os()));
}
