fn main() {
    let cap = std::env::var(roughforge::cli::MAX_LEVEL_ENV).ok();
    std::process::exit(roughforge::cli::main_with(std::env::args_os(), cap.as_deref()));
}
