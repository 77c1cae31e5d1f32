//! Operator sources: description files and builtin families.

use std::path::PathBuf;

use sfp_core::bench::{gen_qms, BccmInstance};
use sfp_core::gains::MonotoneOperator;
use sfp_core::opfile::OperatorFile;

use crate::CliError;

/// Where an operator comes from: a schema file on disk or one of the
/// builtin benchmark families.
#[derive(Clone, Debug)]
pub enum OperatorSource {
    File(PathBuf),
    BccmPerturbed3d,
    BccmChain { n: usize, theta: f64, zeta: f64 },
    Qms { n: usize, seed: u64 },
}

impl OperatorSource {
    /// Accepts a path, or a builtin selector:
    /// `builtin:bccm-perturbed-3d`, `builtin:bccm-chain:N:THETA:ZETA`,
    /// `builtin:qms:N:SEED`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let Some(rest) = spec.strip_prefix("builtin:") else {
            return Ok(OperatorSource::File(PathBuf::from(spec)));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        match parts.as_slice() {
            ["bccm-perturbed-3d"] => Ok(OperatorSource::BccmPerturbed3d),
            ["bccm-chain", n, theta, zeta] => Ok(OperatorSource::BccmChain {
                n: parse_field(n, "chain dimension")?,
                theta: parse_field(theta, "theta")?,
                zeta: parse_field(zeta, "zeta")?,
            }),
            ["qms", n, seed] => Ok(OperatorSource::Qms {
                n: parse_field(n, "dimension")?,
                seed: parse_field(seed, "seed")?,
            }),
            _ => Err(CliError::Input(format!(
                "unknown builtin operator {spec:?}; expected builtin:bccm-perturbed-3d, \
                 builtin:bccm-chain:N:THETA:ZETA or builtin:qms:N:SEED"
            ))),
        }
    }

    pub fn load(&self) -> Result<(MonotoneOperator, String), CliError> {
        match self {
            OperatorSource::File(path) => {
                let file = OperatorFile::read(path).map_err(|e| CliError::Input(e.to_string()))?;
                let op = file
                    .to_operator()
                    .map_err(|e| CliError::Input(e.to_string()))?;
                Ok((op, format!("file {}", path.display())))
            }
            OperatorSource::BccmPerturbed3d => {
                let instance = BccmInstance::perturbed_3d();
                let op = instance
                    .operator()
                    .map_err(|e| CliError::Input(e.to_string()))?;
                Ok((op, "builtin perturbed 3-species control circuit".into()))
            }
            OperatorSource::BccmChain { n, theta, zeta } => {
                let instance = BccmInstance::chain(*n, *theta, *zeta)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let op = instance
                    .operator()
                    .map_err(|e| CliError::Input(e.to_string()))?;
                Ok((
                    op,
                    format!("builtin control circuit chain (N={n}, theta={theta}, zeta={zeta})"),
                ))
            }
            OperatorSource::Qms { n, seed } => {
                let (op, _) =
                    gen_qms(*n, *seed).map_err(|e| CliError::Algorithm(e.to_string()))?;
                Ok((op, format!("builtin quasi-monotone draw (N={n}, seed={seed})")))
            }
        }
    }
}

fn parse_field<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, CliError> {
    text.parse()
        .map_err(|_| CliError::Input(format!("cannot parse {what} from {text:?}")))
}
