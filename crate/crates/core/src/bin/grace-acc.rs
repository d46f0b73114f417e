fn main() {
    std::process::exit(grace_acc::cli::run(std::env::args_os()));
}
