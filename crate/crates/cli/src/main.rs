fn main() {
    std::process::exit(coulomb_gas_cli::main_with_args(std::env::args_os()));
}
