use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use esg_core::ingest::BlankNodeScope;
use esg_core::select::GroundTerms;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Classes,
    Properties,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Memory,
    Disk,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    PerSource,
    Shared,
}

impl From<Scope> for BlankNodeScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::PerSource => BlankNodeScope::PerSource,
            Scope::Shared => BlankNodeScope::Shared,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    #[default]
    Fifo,
    Lifo,
}

/// Everything a build needs. Read from a TOML or JSON file, then
/// overridden field by field from the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub mode: RunMode,
    pub output: PathBuf,
    /// Existing property ESG directory; required for `mode = "classes"`.
    pub property_esg: Option<PathBuf>,
    pub ground: GroundTerms,
    /// Extra triples to drop, one `s p o` line of IRIs each.
    pub denylist: Vec<String>,
    pub default_denylist: bool,
    pub storage: Backend,
    pub bnode_scope: Scope,
    pub discipline: Discipline,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            mode: RunMode::default(),
            output: PathBuf::from("out"),
            property_esg: None,
            ground: GroundTerms::default(),
            denylist: Vec::new(),
            default_denylist: true,
            storage: Backend::default(),
            bnode_scope: Scope::default(),
            discipline: Discipline::default(),
        }
    }
}

impl RunConfig {
    /// `.json` files are JSON, anything else TOML.
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::user("io", format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Failure::user("config", format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.inputs.is_empty() {
            return Err(Failure::user("config", "no input files given"));
        }
        if self.mode == RunMode::Classes && self.property_esg.is_none() {
            return Err(Failure::user(
                "config",
                "mode 'classes' needs --property-esg (or use mode 'both')",
            ));
        }
        Ok(())
    }
}

#[derive(Args, Debug, Default)]
pub struct GroundArgs {
    #[arg(long, value_name = "IRI")]
    pub p_eq: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub p_sub: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub p_e: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub p_s: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub rdf_type: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub rdfs_class: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub rdf_property: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub rdfs_domain: Option<String>,
    #[arg(long, value_name = "IRI")]
    pub rdfs_range: Option<String>,
}

impl GroundArgs {
    pub fn apply(&self, g: &mut GroundTerms) {
        let pairs = [
            (&self.p_eq, &mut g.p_eq),
            (&self.p_sub, &mut g.p_sub),
            (&self.p_e, &mut g.p_e),
            (&self.p_s, &mut g.p_s),
            (&self.rdf_type, &mut g.rdf_type),
            (&self.rdfs_class, &mut g.rdfs_class),
            (&self.rdf_property, &mut g.rdf_property),
            (&self.rdfs_domain, &mut g.rdfs_domain),
            (&self.rdfs_range, &mut g.rdfs_range),
        ];
        for (flag, field) in pairs {
            if let Some(v) = flag {
                field.clone_from(v);
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// TOML or JSON run configuration; flags given here override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// N-Triples input (`.nt` or `.nt.gz`); repeatable.
    #[arg(short, long = "input", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<RunMode>,
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Property ESG directory to take predicate closures from.
    #[arg(long, value_name = "DIR")]
    pub property_esg: Option<PathBuf>,
    #[command(flatten)]
    pub ground: GroundArgs,
    /// Extra triple to drop, as `"s p o"` IRIs; repeatable.
    #[arg(long = "deny", value_name = "TRIPLE")]
    pub deny: Vec<String>,
    /// Keep the two built-in denylisted triples.
    #[arg(long)]
    pub no_default_denylist: bool,
    #[arg(long, value_enum)]
    pub storage: Option<Backend>,
    #[arg(long, value_enum)]
    pub bnode_scope: Option<Scope>,
    #[arg(long, value_enum)]
    pub discipline: Option<Discipline>,
}

impl BuildArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs.clone();
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(p) = &self.property_esg {
            cfg.property_esg = Some(p.clone());
        }
        self.ground.apply(&mut cfg.ground);
        cfg.denylist.extend(self.deny.iter().cloned());
        if self.no_default_denylist {
            cfg.default_denylist = false;
        }
        if let Some(s) = self.storage {
            cfg.storage = s;
        }
        if let Some(s) = self.bnode_scope {
            cfg.bnode_scope = s;
        }
        if let Some(d) = self.discipline {
            cfg.discipline = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
