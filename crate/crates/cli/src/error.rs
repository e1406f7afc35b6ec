use dctx_core::blockdct::BlockDctError;
use dctx_core::jfif::JfifError;
use dctx_core::metrics::MetricsError;
use dctx_core::pnm::PnmError;
use dctx_net::NetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("missing pair for {0}")]
    MissingPair(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) | CliError::MissingPair(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PnmError> for CliError {
    fn from(e: PnmError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<JfifError> for CliError {
    fn from(e: JfifError) -> Self {
        CliError::Input(format!("{e:?}: {e}"))
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BlockDctError> for CliError {
    fn from(e: BlockDctError) -> Self {
        match e {
            BlockDctError::QfOutOfRange(_) | BlockDctError::ShiftOutOfRange(..) => CliError::Usage(format!("{e:?}: {e}")),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        let msg = e.to_string();
        match e {
            NetError::NonFiniteLoss { .. } => CliError::Numeric(msg),
            NetError::Config(_) | NetError::ChannelNotDivisibleByHead { .. } | NetError::StepOutOfRange { .. } => {
                CliError::Usage(msg)
            }
            NetError::BadMagic => CliError::Input(format!("BadMagic: {msg}")),
            NetError::ConfigMismatch(_) => CliError::Input(format!("ConfigMismatch: {msg}")),
            NetError::DimMismatch(_) => CliError::Input(format!("DimMismatch: {msg}")),
            _ => CliError::Input(msg),
        }
    }
}
