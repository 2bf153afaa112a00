fn main() {
    std::process::exit(igusa_laurent::cli::run(std::env::args_os()));
}
