//! Flat `key=value` run configuration with `#` comments.
//!
//! The format is deliberately free of structure: one key per line,
//! unknown keys are errors naming the key, and serialization writes keys
//! in a fixed order so parse -> serialize -> parse is idempotent.

use std::collections::HashMap;
use std::fmt::Write as _;

use stratwave::exact::{Envelope, WaveVector};
use stratwave::{Grid2D, PhysicalParams};

/// Initial-condition families selectable from a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    PlaneWave,
    Lorentzian,
    Gaussian,
    Invariant,
    Random,
    Snapshot,
}

impl Initial {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "plane_wave" => Ok(Initial::PlaneWave),
            "lorentzian" => Ok(Initial::Lorentzian),
            "gaussian" => Ok(Initial::Gaussian),
            "invariant" => Ok(Initial::Invariant),
            "random" => Ok(Initial::Random),
            "snapshot" => Ok(Initial::Snapshot),
            other => Err(format!(
                "initial: unknown family `{other}` (expected plane_wave, lorentzian, gaussian, invariant, random or snapshot)"
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Initial::PlaneWave => "plane_wave",
            Initial::Lorentzian => "lorentzian",
            Initial::Gaussian => "gaussian",
            Initial::Invariant => "invariant",
            Initial::Random => "random",
            Initial::Snapshot => "snapshot",
        }
    }
}

/// One simulation run: grid, constants, stepping, initial condition,
/// output location, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
    pub lz: f64,
    pub g: f64,
    pub f: f64,
    pub n: f64,
    /// Step size; a value <= 0 selects the automatic step.
    pub dt: f64,
    /// Nyquist-scale damping rate of the optional spectral filter;
    /// 0 (the default) disables it.
    pub hyperviscosity: f64,
    pub n_steps: usize,
    pub snapshot_every: usize,
    pub seed: u64,
    pub output_dir: String,
    pub initial: Initial,
    pub wave_k: f64,
    pub wave_m: f64,
    pub amplitude: f64,
    pub beam_width: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub initial_t: f64,
    pub snapshot_path: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            nx: 64,
            nz: 64,
            lx: two_pi,
            lz: two_pi,
            g: 1.0,
            f: 0.5,
            n: 1.0,
            dt: 0.0,
            hyperviscosity: 0.0,
            n_steps: 200,
            snapshot_every: 20,
            seed: 42,
            output_dir: "out".into(),
            initial: Initial::PlaneWave,
            wave_k: 1.0,
            wave_m: 1.0,
            amplitude: 1.0,
            beam_width: 1.0,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            initial_t: 0.0,
            snapshot_path: String::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse `{value}`"))
}

impl RunConfig {
    /// Parse the flat text form. The first offending key is named in the
    /// error.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut seen = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), ()).is_some() {
                return Err(format!("{key}: duplicate key"));
            }
            match key {
                "nx" => cfg.nx = parse_num(key, value)?,
                "nz" => cfg.nz = parse_num(key, value)?,
                "lx" => cfg.lx = parse_num(key, value)?,
                "lz" => cfg.lz = parse_num(key, value)?,
                "g" => cfg.g = parse_num(key, value)?,
                "f" => cfg.f = parse_num(key, value)?,
                "n" => cfg.n = parse_num(key, value)?,
                "dt" => cfg.dt = parse_num(key, value)?,
                "hyperviscosity" => cfg.hyperviscosity = parse_num(key, value)?,
                "n_steps" => cfg.n_steps = parse_num(key, value)?,
                "snapshot_every" => cfg.snapshot_every = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "output_dir" => cfg.output_dir = value.to_string(),
                "initial" => cfg.initial = Initial::parse(value)?,
                "wave_k" => cfg.wave_k = parse_num(key, value)?,
                "wave_m" => cfg.wave_m = parse_num(key, value)?,
                "amplitude" => cfg.amplitude = parse_num(key, value)?,
                "beam_width" => cfg.beam_width = parse_num(key, value)?,
                "c1" => cfg.c1 = parse_num(key, value)?,
                "c2" => cfg.c2 = parse_num(key, value)?,
                "c3" => cfg.c3 = parse_num(key, value)?,
                "initial_t" => cfg.initial_t = parse_num(key, value)?,
                "snapshot_path" => cfg.snapshot_path = value.to_string(),
                other => return Err(format!("{other}: unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validate every numeric field against the library preconditions
    /// before any compute. Errors name the offending key.
    pub fn validate(&self) -> Result<(), String> {
        Grid2D::new(self.nx, self.nz, self.lx, self.lz)
            .map_err(|e| format!("nx/nz/lx/lz: {e}"))?;
        PhysicalParams::new(self.g, self.f, self.n).map_err(|e| format!("g/f/n: {e}"))?;
        if self.snapshot_every == 0 {
            return Err("snapshot_every: must be >= 1".into());
        }
        if self.dt > 0.0 && !self.dt.is_finite() {
            return Err("dt: must be finite".into());
        }
        if !self.hyperviscosity.is_finite() || self.hyperviscosity < 0.0 {
            return Err("hyperviscosity: must be finite and >= 0".into());
        }
        if !self.amplitude.is_finite() {
            return Err("amplitude: must be finite".into());
        }
        match self.initial {
            Initial::PlaneWave | Initial::Lorentzian | Initial::Gaussian | Initial::Invariant => {
                WaveVector::new(self.wave_k, self.wave_m)
                    .map_err(|_| "wave_k/wave_m: zero wave vector".to_string())?;
            }
            Initial::Snapshot => {
                if self.snapshot_path.is_empty() {
                    return Err("snapshot_path: required when initial=snapshot".into());
                }
            }
            Initial::Random => {}
        }
        if (self.initial == Initial::Lorentzian || self.initial == Initial::Gaussian)
            && self.amplitude <= 0.0
        {
            return Err("amplitude: beams need a positive amplitude".into());
        }
        if self.initial == Initial::Gaussian && (!self.beam_width.is_finite() || self.beam_width <= 0.0) {
            return Err("beam_width: must be > 0".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid2D {
        Grid2D::new(self.nx, self.nz, self.lx, self.lz).expect("validated")
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams::new(self.g, self.f, self.n).expect("validated")
    }

    pub fn wave(&self) -> WaveVector {
        WaveVector::new(self.wave_k, self.wave_m).expect("validated")
    }

    /// Stream-function envelopes of the configured beam family.
    pub fn beam_envelopes(&self) -> Option<(Envelope, Envelope)> {
        match self.initial {
            Initial::PlaneWave => Some((
                Envelope::Cosine(self.amplitude),
                Envelope::Sine(self.amplitude),
            )),
            Initial::Lorentzian => Some((
                Envelope::Lorentzian { a: self.amplitude },
                Envelope::LorentzianOdd { a: self.amplitude },
            )),
            Initial::Gaussian => Some((
                Envelope::Gaussian {
                    amp: self.amplitude,
                    width: self.beam_width,
                },
                Envelope::Zero,
            )),
            _ => None,
        }
    }

    /// Fixed-order serialization; comments mark the sections.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# grid");
        let _ = writeln!(s, "nx={}", self.nx);
        let _ = writeln!(s, "nz={}", self.nz);
        let _ = writeln!(s, "lx={}", self.lx);
        let _ = writeln!(s, "lz={}", self.lz);
        let _ = writeln!(s, "# physical constants");
        let _ = writeln!(s, "g={}", self.g);
        let _ = writeln!(s, "f={}", self.f);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "# time stepping (dt<=0 selects the automatic step)");
        let _ = writeln!(s, "dt={}", self.dt);
        let _ = writeln!(s, "hyperviscosity={}", self.hyperviscosity);
        let _ = writeln!(s, "n_steps={}", self.n_steps);
        let _ = writeln!(s, "snapshot_every={}", self.snapshot_every);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "output_dir={}", self.output_dir);
        let _ = writeln!(s, "# initial condition");
        let _ = writeln!(s, "initial={}", self.initial.as_str());
        let _ = writeln!(s, "wave_k={}", self.wave_k);
        let _ = writeln!(s, "wave_m={}", self.wave_m);
        let _ = writeln!(s, "amplitude={}", self.amplitude);
        let _ = writeln!(s, "beam_width={}", self.beam_width);
        let _ = writeln!(s, "c1={}", self.c1);
        let _ = writeln!(s, "c2={}", self.c2);
        let _ = writeln!(s, "c3={}", self.c3);
        let _ = writeln!(s, "initial_t={}", self.initial_t);
        if !self.snapshot_path.is_empty() {
            let _ = writeln!(s, "snapshot_path={}", self.snapshot_path);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let text = "nx=32\nnz=32\ng=2.5\nf=0 # no rotation\nn=1.5\ninitial=random\nseed=7\n";
        let cfg = RunConfig::parse(text).unwrap();
        let once = cfg.serialize();
        let cfg2 = RunConfig::parse(&once).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(once, cfg2.serialize());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("bogus=1\n").unwrap_err();
        assert!(err.starts_with("bogus"), "{err}");
    }

    #[test]
    fn bad_value_names_key() {
        let err = RunConfig::parse("nx=abc\n").unwrap_err();
        assert!(err.starts_with("nx"), "{err}");
    }

    #[test]
    fn validation_names_field() {
        let err = RunConfig::parse("nx=6\n").unwrap_err();
        assert!(err.starts_with("nx"), "{err}");
        let err = RunConfig::parse("n=0\n").unwrap_err();
        assert!(err.starts_with("g/f/n"), "{err}");
        let err = RunConfig::parse("initial=snapshot\n").unwrap_err();
        assert!(err.starts_with("snapshot_path"), "{err}");
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = RunConfig::parse("# hello\n\n  nx = 16 # inline\nnz=16\n").unwrap();
        assert_eq!(cfg.nx, 16);
    }
}
