use clap::Parser;
use cork_cli::{run, Cli, EXIT_INPUT};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let report = run(&cli);
    if cli.json {
        println!("{}", report.json);
    } else if report.status == EXIT_INPUT {
        eprintln!("{}", report.summary);
    } else {
        println!("{}", report.summary);
    }
    std::process::exit(report.status);
}
