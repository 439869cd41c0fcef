fn main() {
    std::process::exit(sievecert_cli::app::run(std::env::args_os()));
}
