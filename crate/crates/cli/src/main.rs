fn main() {
    std::process::exit(seqfn_cli::main_entry());
}
