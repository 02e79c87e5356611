use clap::Parser;

fn main() {
    let cli = churnforge_cli::Cli::parse();
    match churnforge_cli::run(&cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            std::process::exit(1);
        }
    }
}
