fn main() {
    std::process::exit(verdict::cli::dispatch(std::env::args_os()));
}
