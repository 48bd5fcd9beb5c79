fn main() {
    std::process::exit(vasicek_lse::cli::main_with_args(std::env::args_os()));
}
