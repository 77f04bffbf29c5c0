fn main() {
    std::process::exit(paneljudge::cli::main_entry());
}
