use std::io;

fn main() {
    let code = connes_lattice::cli::execute(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
