use std::process::ExitCode;

use nvfem_driver::app::execute;

fn main() -> ExitCode {
    let run = execute(std::env::args_os());
    print!("{}", run.stdout);
    eprint!("{}", run.stderr);
    ExitCode::from(run.code)
}
