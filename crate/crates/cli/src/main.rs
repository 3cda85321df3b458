fn main() {
    std::process::exit(lieblab_cli::main_entry());
}
