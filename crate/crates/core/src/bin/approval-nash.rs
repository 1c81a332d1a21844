fn main() {
    std::process::exit(approval_nash::harness::cli(std::env::args().collect()));
}
