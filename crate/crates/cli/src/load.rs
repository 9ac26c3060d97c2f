use std::path::{Path, PathBuf};

use clap::Args;
use lasso_paths::instances::Instance;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Edge list (`u v w` per line).
    #[arg(long)]
    pub instance: PathBuf,
    /// JSON sidecar with provenance and query pairs; defaults to the
    /// `<stem>.json` next to a `<stem>.edges.tsv` edge list.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

fn default_sidecar(edges: &Path) -> Option<PathBuf> {
    let name = edges.file_name()?.to_str()?;
    let stem = name.strip_suffix(".edges.tsv")?;
    let candidate = edges.with_file_name(format!("{stem}.json"));
    candidate.exists().then_some(candidate)
}

impl InstanceArgs {
    pub fn load(&self) -> Result<Instance, CliError> {
        if !self.instance.exists() {
            return Err(CliError::Input(format!(
                "{} does not exist",
                self.instance.display()
            )));
        }
        let sidecar = self
            .sidecar
            .clone()
            .or_else(|| default_sidecar(&self.instance));
        Ok(Instance::from_files(
            &self.instance,
            sidecar.as_deref(),
            None,
        )?)
    }
}

pub fn describe(inst: &Instance) -> Value {
    json!({
        "provenance": inst.provenance,
        "n": inst.graph.n(),
        "m": inst.graph.m(),
    })
}

/// Resolves `--s/--t` labels, falling back to the instance's first pair.
pub fn resolve_pair(
    inst: &Instance,
    s: Option<u64>,
    t: Option<u64>,
) -> Result<(usize, usize), CliError> {
    match (s, t) {
        (Some(s), Some(t)) => Ok((
            inst.graph.vertex_of_label(s)?,
            inst.graph.vertex_of_label(t)?,
        )),
        (None, None) => inst.pairs.first().copied().ok_or_else(|| {
            CliError::Input("no --s/--t given and the instance lists no pairs".into())
        }),
        _ => Err(CliError::Input("--s and --t must be given together".into())),
    }
}
