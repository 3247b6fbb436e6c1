use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use rankgrad_service::{router, ServiceConfig, Store};
use tracing_subscriber::EnvFilter;

/// Serve interactive ranking-feedback optimization sessions over HTTP.
#[derive(Parser)]
#[command(name = "rankgrad-service", version)]
struct Cli {
    /// Configuration file (TOML). Environment variables override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    let config = ServiceConfig::load(cli.config.as_deref())?;
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&config.log_level)?)
        .init();

    let store = Arc::new(Store::open(&config.data_dir, config.batch_ttl())?);
    let app = router(store, config.static_dir.clone());
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
