fn main() {
    std::process::exit(tiletree::cli::run(std::env::args_os()));
}
