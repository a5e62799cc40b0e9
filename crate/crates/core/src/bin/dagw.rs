fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    dag_wishart::cli::configure_threads();
    std::process::exit(dag_wishart::cli::run(std::env::args_os()));
}
