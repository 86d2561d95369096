fn main() {
    std::process::exit(roundel::cli::run(std::env::args_os()));
}
