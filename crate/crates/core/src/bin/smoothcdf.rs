fn main() {
    std::process::exit(smoothcdf::cli::run(std::env::args_os()));
}
