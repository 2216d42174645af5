fn main() {
    std::process::exit(geotail_cli::run(std::env::args_os()));
}
