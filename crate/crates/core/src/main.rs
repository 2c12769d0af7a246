fn main() {
    let code = buchstab_bounds::cli::main_from_env();
    std::process::exit(code);
}
