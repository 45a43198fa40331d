fn main() {
    std::process::exit(pnmc_lab::main_with_args(std::env::args_os()));
}
