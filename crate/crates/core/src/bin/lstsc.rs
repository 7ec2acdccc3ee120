fn main() {
    std::process::exit(lstsc::cli::run(std::env::args_os()));
}
