//! Run configuration: a TOML file, defaults for anything it leaves out, and
//! command-line overrides on top. The fully resolved record is written next
//! to the outputs so a run can be repeated from it alone.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qsketch::experiments::calibrate::CalibrateConfig;
use qsketch::experiments::disk::DiskConfig;
use qsketch::experiments::mnist::MnistConfig;
use qsketch::experiments::spe::SpeBenchConfig;
use qsketch::experiments::Channel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Disk,
    Mnist,
    SpeBench,
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Disk => "disk",
            Command::Mnist => "mnist",
            Command::SpeBench => "spe-bench",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataPaths {
    /// Directory with the four MNIST IDX files.
    pub mnist_dir: PathBuf,
    /// Recorded device sketches for the `opu-file` channel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sketches: Option<PathBuf>,
}

impl Default for DataPaths {
    fn default() -> Self {
        Self {
            mnist_dir: PathBuf::from("data/mnist"),
            sketches: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub data: DataPaths,
    /// Also write the raw sketches of every input in the recorded-file
    /// format.
    #[serde(default)]
    pub export_sketches: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<DiskConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mnist: Option<MnistConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spe_bench: Option<SpeBenchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub m: Option<Vec<usize>>,
    pub channel: Option<Vec<Channel>>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub sketches: Option<PathBuf>,
    pub export_sketches: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            out: default_out(),
            data: DataPaths::default(),
            export_sketches: false,
            disk: None,
            mnist: None,
            spe_bench: None,
            calibrate: None,
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fills the section for `self.command` with defaults, drops the others,
    /// and applies `ov`.
    pub fn resolve(mut self, ov: &Overrides) -> anyhow::Result<Self> {
        if let Some(out) = &ov.out {
            self.out = out.clone();
        }
        if let Some(d) = &ov.data {
            self.data.mnist_dir = d.clone();
        }
        if let Some(s) = &ov.sketches {
            self.data.sketches = Some(s.clone());
        }
        self.export_sketches |= ov.export_sketches;

        let single_m = |what: &str| -> anyhow::Result<Option<usize>> {
            match ov.m.as_deref() {
                None => Ok(None),
                Some([m]) => Ok(Some(*m)),
                Some(_) => bail!("{what} takes a single --m value"),
            }
        };
        let single_channel = |what: &str| -> anyhow::Result<Option<Channel>> {
            match ov.channel.as_deref() {
                None => Ok(None),
                Some([c]) => Ok(Some(*c)),
                Some(_) => bail!("{what} takes a single --channel value"),
            }
        };

        match self.command {
            Command::Disk => {
                let mut c = self.disk.take().unwrap_or_default();
                if let Some(s) = ov.seed {
                    c.seed = s;
                }
                if let Some(m) = single_m("disk")? {
                    c.pairs = m;
                }
                if let Some(ch) = single_channel("disk")? {
                    c.channel = ch;
                }
                self.disk = Some(c);
                self.mnist = None;
                self.spe_bench = None;
                self.calibrate = None;
            }
            Command::Mnist => {
                let mut c = self.mnist.take().unwrap_or_default();
                if let Some(s) = ov.seed {
                    c.seeds = vec![s];
                }
                if let Some(m) = &ov.m {
                    c.pairs = m.clone();
                }
                if let Some(ch) = &ov.channel {
                    c.channels = ch.clone();
                }
                self.mnist = Some(c);
                self.disk = None;
                self.spe_bench = None;
                self.calibrate = None;
            }
            Command::SpeBench => {
                if ov.channel.is_some() {
                    bail!("spe-bench has no channel; it measures the ideal sketch");
                }
                let mut c = self.spe_bench.take().unwrap_or_default();
                if let Some(s) = ov.seed {
                    c.seed = s;
                }
                if let Some(m) = &ov.m {
                    c.pairs = m.clone();
                }
                self.spe_bench = Some(c);
                self.disk = None;
                self.mnist = None;
                self.calibrate = None;
            }
            Command::Calibrate => {
                if ov.channel.is_some() {
                    bail!("calibrate always targets the simulated device; --channel does not apply");
                }
                let mut c = self.calibrate.take().unwrap_or_default();
                if let Some(s) = ov.seed {
                    c.seed = s;
                }
                if let Some(m) = single_m("calibrate")? {
                    c.pairs = m;
                }
                self.calibrate = Some(c);
                self.disk = None;
                self.mnist = None;
                self.spe_bench = None;
            }
        }
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> anyhow::Result<()> {
        let uses_file = match self.command {
            Command::Disk => self.disk.as_ref().is_some_and(|c| c.channel == Channel::OpuFile),
            Command::Mnist => self
                .mnist
                .as_ref()
                .is_some_and(|c| c.channels.contains(&Channel::OpuFile)),
            _ => false,
        };
        if uses_file && self.data.sketches.is_none() {
            bail!("the opu-file channel needs a sketch file (--sketches or data.sketches)");
        }
        if uses_file && self.export_sketches {
            bail!("--export-sketches re-records simulated sketches; it cannot be combined with opu-file");
        }
        if self.export_sketches && matches!(self.command, Command::SpeBench | Command::Calibrate) {
            bail!("--export-sketches applies to disk and mnist only");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn resolved_path(&self) -> PathBuf {
        self.out.join(format!("{}.resolved.toml", self.command.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_materialize_and_round_trip() {
        for cmd in [Command::Disk, Command::Mnist, Command::SpeBench, Command::Calibrate] {
            let c = RunConfig::new(cmd).resolve(&Overrides::default()).unwrap();
            let text = c.to_toml().unwrap();
            let back: RunConfig = toml::from_str(&text).unwrap();
            assert_eq!(back, c, "{text}");
            assert!(text.contains("seed"), "{text}");
        }
    }

    #[test]
    fn flags_win_over_file() {
        let file: RunConfig = toml::from_str(
            r#"
            command = "mnist"
            [mnist]
            seeds = [1, 2]
            pairs = [10]
            "#,
        )
        .unwrap();
        let ov = Overrides {
            seed: Some(9),
            m: Some(vec![20, 40]),
            ..Overrides::default()
        };
        let c = file.resolve(&ov).unwrap();
        let m = c.mnist.unwrap();
        assert_eq!(m.seeds, vec![9]);
        assert_eq!(m.pairs, vec![20, 40]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("command = \"disk\"\n[disk]\npairz = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("command = \"disk\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn inconsistent_flags() {
        let disk = RunConfig::new(Command::Disk);
        let many = Overrides {
            m: Some(vec![1, 2]),
            ..Overrides::default()
        };
        assert!(disk.clone().resolve(&many).is_err());
        let file = Overrides {
            channel: Some(vec![Channel::OpuFile]),
            ..Overrides::default()
        };
        assert!(disk.resolve(&file).is_err());
        let spe = Overrides {
            channel: Some(vec![Channel::Ideal]),
            ..Overrides::default()
        };
        assert!(RunConfig::new(Command::SpeBench).resolve(&spe).is_err());
    }
}
