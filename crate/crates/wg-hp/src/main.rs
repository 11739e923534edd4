fn main() {
    std::process::exit(wg_hp::main_with_args(std::env::args_os()));
}
