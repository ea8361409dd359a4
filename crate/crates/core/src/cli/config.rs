use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::dist::{BidDistribution, BidGrid, BidLaw};
use crate::error::{Error, Result};
use crate::hjb::StageTwoParams;
use crate::obsa::Mechanism;
use crate::sim::{Exec, Scenario1Config, Scenario3Config, Scenario4Config};

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Scenario1,
    Scenario2,
    Scenario3,
    Scenario4,
    Chain,
    Curve,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Scenario1, Command::Scenario2, Command::Scenario3, Command::Scenario4, Command::Chain, Command::Curve];

    pub fn name(self) -> &'static str {
        match self {
            Command::Scenario1 => "scenario1",
            Command::Scenario2 => "scenario2",
            Command::Scenario3 => "scenario3",
            Command::Scenario4 => "scenario4",
            Command::Chain => "chain",
            Command::Curve => "curve",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|c| c.name()).collect();
            Error::Config(format!("unknown scenario `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Real,
    Count,
    Reals,
    Counts,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn check(self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("key `{key}`: expected {what}, got `{value}`")));
        let ok = match self {
            Kind::Real => value.parse::<f64>().is_ok_and(f64::is_finite),
            Kind::Count => value.parse::<u64>().is_ok(),
            Kind::Reals => split(value).all(|v| v.parse::<f64>().is_ok_and(f64::is_finite)),
            Kind::Counts => split(value).all(|v| v.parse::<u64>().is_ok()),
            Kind::Choice(opts) => opts.contains(&value),
        };
        if ok {
            return Ok(());
        }
        match self {
            Kind::Real => bad("a finite real"),
            Kind::Count => bad("a nonnegative integer"),
            Kind::Reals => bad("a comma-separated list of finite reals"),
            Kind::Counts => bad("a comma-separated list of nonnegative integers"),
            Kind::Choice(opts) => bad(&format!("one of {}", opts.join(", "))),
        }
    }
}

fn split(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim)
}

/// Key, kind, default, meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("v_min", "48", "lowest bid on the grid"),
    ("v_max", "312", "highest bid on the grid"),
    ("delta", "1", "bid grid step"),
    ("law", "uniform", "bid law: uniform or laplace"),
    ("mu", "70", "sampled-Laplace location"),
    ("w", "50", "sampled-Laplace scale"),
    ("p_b", "0.5", "survival probability of a stored bumped agent"),
    ("exec", "parallel", "replication execution: parallel or sequential"),
    ("reps", "10000", "Monte Carlo replications"),
    ("mechanism", "both", "first, second or both"),
    ("lambdas", "5,10,20", "mean participants per round, swept"),
    ("deltas", "0,1,2,3,4,5", "patience windows, swept"),
    ("lambda", "10", "mean participants per round for the chain query"),
    ("patience", "3", "patience window for the chain query"),
    ("u", "5", "stage-two utility of a won resource"),
    ("varpi", "312", "stage-two bid at r = 0"),
    ("gamma", "0.1", "time preference for the curve command"),
    ("gammas", "0.05,0.1,0.2", "time preferences swept by scenario2"),
    ("mu_active", "0.6", "fraction of active CCN managers"),
    ("lambda_a", "0.2", "auction arrival rate"),
    ("lambda_ccn", "0.5", "rival CCN bid rate"),
    ("lambda_cp", "0.75", "provider offer rate"),
    ("tp", "20", "stage-two horizon"),
    ("a", "0.01", "lower support of rival bids"),
    ("z", "104", "upper support of rival bids"),
    ("q", "0.01", "lower support of provider offers"),
    ("steps", "2000", "RK4 steps over the stage-two horizon"),
    ("types", "10", "server types"),
    ("capacity", "1000", "servers of each type offered per minute"),
    ("avail_min", "0.0666666666666667", "lowest per-type availability rate"),
    ("avail_max", "1", "highest per-type availability rate"),
    ("bundle_min", "1", "smallest bundle size"),
    ("bundle_max", "10", "largest bundle size"),
    ("arrival_rate", "300", "mean customer arrivals per minute"),
    ("minutes", "60", "scenario3 horizon"),
    ("mean_arrivals", "93", "mean arrivals per instant"),
    ("informed", "0.2", "fraction of arrivals aware of low-price instants"),
    ("period", "10", "low-price instant period"),
    ("instants", "200", "scenario4 horizon"),
];

fn kind(key: &str) -> Option<Kind> {
    Some(match key {
        "law" => Kind::Choice(&["uniform", "laplace"]),
        "exec" => Kind::Choice(&["parallel", "sequential"]),
        "mechanism" => Kind::Choice(&["first", "second", "both"]),
        "lambdas" | "gammas" => Kind::Reals,
        "deltas" => Kind::Counts,
        "reps" | "patience" | "steps" | "types" | "capacity" | "bundle_min" | "bundle_max" | "minutes" | "period"
        | "instants" => Kind::Count,
        k if KEYS.iter().any(|(name, _, _)| *name == k) => Kind::Real,
        _ => return None,
    })
}

/// Named parameter sets.
pub const PRESETS: &[&str] = &["table1-uniform", "table1-laplace", "table2"];

pub fn preset_pairs(name: &str) -> Result<Vec<(&'static str, &'static str)>> {
    let grid = [("v_min", "48"), ("v_max", "312"), ("delta", "1"), ("p_b", "0.5")];
    Ok(match name {
        "table1-uniform" => [&grid[..], &[("law", "uniform")]].concat(),
        "table1-laplace" => [&grid[..], &[("law", "laplace"), ("mu", "70"), ("w", "50")]].concat(),
        "table2" => vec![
            ("u", "5"),
            ("mu_active", "0.6"),
            ("lambda_a", "0.2"),
            ("lambda_ccn", "0.5"),
            ("lambda_cp", "0.75"),
            ("z", "104"),
            ("a", "0.01"),
            ("q", "0.01"),
        ],
        _ => return Err(Error::Config(format!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")))),
    })
}

/// Parses `key = value` lines; `#` starts a comment. Duplicate keys are an
/// error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if out.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(out)
}

/// Fully resolved parameter values, one per known key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Default for Settings {
    fn default() -> Self {
        Self(KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect())
    }
}

impl Settings {
    /// Applies one override after checking the key and the value's type.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = kind(key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        kind.check(key, value)?;
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        for (k, v) in preset_pairs(name)? {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or_else(|| panic!("key `{key}` is not in the table"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn real(&self, key: &str) -> f64 {
        self.get(key).parse().expect("checked on insert")
    }

    fn count(&self, key: &str) -> u64 {
        self.get(key).parse().expect("checked on insert")
    }

    fn reals(&self, key: &str) -> Vec<f64> {
        split(self.get(key)).map(|v| v.parse().expect("checked on insert")).collect()
    }

    fn counts(&self, key: &str) -> Vec<u64> {
        split(self.get(key)).map(|v| v.parse().expect("checked on insert")).collect()
    }

    pub fn exec(&self) -> Exec {
        if self.get("exec") == "sequential" {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    pub fn mechanisms(&self) -> Vec<Mechanism> {
        match self.get("mechanism") {
            "first" => vec![Mechanism::FirstPrice],
            "second" => vec![Mechanism::SecondPrice],
            _ => vec![Mechanism::FirstPrice, Mechanism::SecondPrice],
        }
    }

    pub fn bids(&self) -> Result<BidDistribution> {
        let grid = BidGrid::new(self.real("v_min"), self.real("v_max"), self.real("delta"))?;
        let law = match self.get("law") {
            "laplace" => BidLaw::SampledLaplace { mu: self.real("mu"), w: self.real("w") },
            _ => BidLaw::Uniform,
        };
        BidDistribution::from_law(grid, law)
    }

    pub fn p_b(&self) -> f64 {
        self.real("p_b")
    }

    pub fn lambda(&self) -> f64 {
        self.real("lambda")
    }

    pub fn patience(&self) -> u64 {
        self.count("patience")
    }

    pub fn steps(&self) -> u64 {
        self.count("steps")
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.reals("gammas")
    }

    pub fn stage_two(&self) -> Result<StageTwoParams> {
        let p = StageTwoParams {
            u: self.real("u"),
            gamma: self.real("gamma"),
            varpi: self.real("varpi"),
            mu_active: self.real("mu_active"),
            lambda_a: self.real("lambda_a"),
            lambda_ccn: self.real("lambda_ccn"),
            lambda_cp: self.real("lambda_cp"),
            tp: self.real("tp"),
            a: self.real("a"),
            z: self.real("z"),
            q: self.real("q"),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn scenario1(&self, seed: u64) -> Result<Scenario1Config> {
        Ok(Scenario1Config {
            bids: self.bids()?,
            lambdas: self.reals("lambdas"),
            deltas: self.counts("deltas"),
            p_b: self.p_b(),
            reps: self.count("reps"),
            seed,
            exec: self.exec(),
        })
    }

    pub fn scenario3(&self, seed: u64) -> Result<Scenario3Config> {
        let size = |k: &str| usize::try_from(self.count(k)).map_err(|_| Error::Config(format!("key `{k}` too large")));
        Ok(Scenario3Config {
            bids: self.bids()?,
            types: size("types")?,
            capacity: u32::try_from(self.count("capacity")).map_err(|_| Error::Config("key `capacity` too large".into()))?,
            availability: (self.real("avail_min"), self.real("avail_max")),
            bundle_sizes: (size("bundle_min")?, size("bundle_max")?),
            arrival_rate: self.real("arrival_rate"),
            minutes: self.count("minutes"),
            seed,
        })
    }

    pub fn scenario4(&self, seed: u64) -> Result<Scenario4Config> {
        Ok(Scenario4Config {
            bids: self.bids()?,
            mean_arrivals: self.real("mean_arrivals"),
            informed: self.real("informed"),
            period: self.count("period"),
            instants: self.count("instants"),
            seed,
        })
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub preset: Option<String>,
    pub settings: Settings,
    pub out: PathBuf,
    pub json: bool,
}

impl RunConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        Self { command, seed, preset: None, settings: Settings::default(), out: PathBuf::from("results"), json: false }
    }

    /// Config text that reproduces this run; no timestamps or paths.
    pub fn manifest(&self, outputs: &[String]) -> String {
        let mut s = format!("# cloudmarket {}\n", env!("CARGO_PKG_VERSION"));
        for o in outputs {
            s.push_str(&format!("# output {o}\n"));
        }
        s.push_str(&format!("scenario = {}\nseed = {}\n", self.command, self.seed));
        if let Some(p) = &self.preset {
            s.push_str(&format!("preset = {p}\n"));
        }
        for (k, v) in self.settings.iter() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

/// Required keys of a config file; everything else has a default.
const REQUIRED: &[&str] = &["scenario", "seed"];

/// Parses config text into a run. `scenario` and `seed` are required;
/// `preset` is applied before the file's other keys.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut pairs = parse_pairs(text)?;
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !pairs.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "missing required keys: {} (scenario names the command, seed is a nonnegative integer)",
            missing.join(", ")
        )));
    }
    let command = Command::parse(&pairs.remove("scenario").expect("checked"))?;
    let seed_text = pairs.remove("seed").expect("checked");
    Kind::Count.check("seed", &seed_text)?;
    let mut run = RunConfig::new(command, seed_text.parse().expect("checked"));
    if let Some(p) = pairs.remove("preset") {
        run.settings.apply_preset(&p)?;
        run.preset = Some(p);
    }
    for (k, v) in &pairs {
        run.settings.set(k, v)?;
    }
    Ok(run)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_preset_values() {
        let mut s = Settings::default();
        s.apply_preset("table2").unwrap();
        let p = s.stage_two().unwrap();
        assert_eq!((p.u, p.mu_active, p.lambda_a, p.lambda_ccn, p.lambda_cp, p.z, p.a), (5.0, 0.6, 0.2, 0.5, 0.75, 104.0, 0.01));
        assert_eq!(p, StageTwoParams::table2());
    }

    #[test]
    fn table1_laplace_preset_values() {
        let mut s = Settings::default();
        s.apply_preset("table1-laplace").unwrap();
        let d = s.bids().unwrap();
        assert_eq!(d.law(), BidLaw::SampledLaplace { mu: 70.0, w: 50.0 });
        assert_eq!((d.grid().v_min(), d.grid().v_max(), d.grid().delta()), (48.0, 312.0, 1.0));
        assert_eq!(s.p_b(), 0.5);
    }

    #[test]
    fn empty_file_lists_missing_keys() {
        let e = parse_config_str("").unwrap_err().to_string();
        assert!(e.contains("scenario") && e.contains("seed"), "{e}");
    }

    #[test]
    fn unknown_and_mistyped_keys_rejected() {
        let e = parse_config_str("scenario = chain\nseed = 1\nlamda = 3\n").unwrap_err().to_string();
        assert!(e.contains("lamda"), "{e}");
        let e = parse_config_str("scenario = chain\nseed = 1\npatience = 2.5\n").unwrap_err().to_string();
        assert!(e.contains("patience") && e.contains("integer"), "{e}");
        assert!(parse_config_str("scenario = scenario9\nseed = 1\n").is_err());
        assert!(parse_config_str("scenario = chain\nseed = 1\nlaw = cauchy\n").is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let mut run = parse_config_str("scenario = scenario4\nseed = 9\npreset = table1-laplace\ninformed = 0.3\n").unwrap();
        run.out = PathBuf::from("elsewhere");
        let again = parse_config_str(&run.manifest(&["a.csv".into()])).unwrap();
        assert_eq!(again.settings, run.settings);
        assert_eq!((again.command, again.seed, again.preset), (run.command, run.seed, run.preset));
    }

    #[test]
    fn every_default_type_checks() {
        for (k, v, _) in KEYS {
            kind(k).unwrap().check(k, v).unwrap();
        }
    }
}
