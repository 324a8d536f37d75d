//! Random unit-demand markets.
//!
//! Three models, each producing an [`Instance`] deterministically from a
//! config and a [`Seed`]:
//!
//! * characteristics: items carry option profiles, bidders accept a subset of
//!   options per characteristic, valuations cluster around a market price;
//! * neighborhood: items and bidders live in the unit square, valuations fall
//!   off with distance;
//! * popularity: preferential attachment on items, market price derived from
//!   a random quality and the final degree.

mod characteristics;
mod neighborhood;
mod popularity;
pub(crate) mod rng;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::Instance;

pub use characteristics::{gen_characteristics, CharacteristicsConfig};
pub use neighborhood::{gen_neighborhood, NeighborhoodConfig};
pub use popularity::{gen_popularity, popularity_market_price, PopularityConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Characteristics,
    Neighborhood,
    Popularity,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Characteristics, Model::Neighborhood, Model::Popularity];

    pub fn name(self) -> &'static str {
        match self {
            Model::Characteristics => "characteristics",
            Model::Neighborhood => "neighborhood",
            Model::Popularity => "popularity",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "characteristics" | "characteristic" => Ok(Model::Characteristics),
            "neighborhood" | "neighbourhood" => Ok(Model::Neighborhood),
            "popularity" => Ok(Model::Popularity),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters of any of the three models.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorConfig {
    Characteristics(CharacteristicsConfig),
    Neighborhood(NeighborhoodConfig),
    Popularity(PopularityConfig),
}

impl GeneratorConfig {
    pub fn model(&self) -> Model {
        match self {
            GeneratorConfig::Characteristics(_) => Model::Characteristics,
            GeneratorConfig::Neighborhood(_) => Model::Neighborhood,
            GeneratorConfig::Popularity(_) => Model::Popularity,
        }
    }

    pub fn generate(&self, seed: Seed) -> Result<Instance> {
        match self {
            GeneratorConfig::Characteristics(c) => gen_characteristics(c, seed),
            GeneratorConfig::Neighborhood(c) => gen_neighborhood(c, seed),
            GeneratorConfig::Popularity(c) => gen_popularity(c, seed),
        }
    }

    /// The config as `key=value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        match self {
            GeneratorConfig::Characteristics(c) => vec![
                ("m", c.m.to_string()),
                ("n", c.n.to_string()),
                ("c", c.c.to_string()),
                ("o", c.o.to_string()),
                ("p", c.p_pref.to_string()),
                ("l", c.ell.to_string()),
                ("h", c.h.to_string()),
                ("d", c.d.to_string()),
            ],
            GeneratorConfig::Neighborhood(c) => vec![
                ("m", c.m.to_string()),
                ("n", c.n.to_string()),
                ("r", c.r.to_string()),
                ("h", c.h.to_string()),
                ("M", c.scale.to_string()),
            ],
            GeneratorConfig::Popularity(c) => vec![
                ("m", c.m.to_string()),
                ("n", c.n.to_string()),
                ("e", c.e.to_string()),
                ("Q", c.q_max.to_string()),
                ("d", c.d.to_string()),
            ],
        }
    }

    /// Overrides one parameter from a `key=value` flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
        }
        let unknown = || Error::InvalidConfig(format!("unknown parameter `{key}`"));
        match self {
            GeneratorConfig::Characteristics(c) => match key {
                "m" => c.m = num(key, value)?,
                "n" => c.n = num(key, value)?,
                "c" => c.c = num(key, value)?,
                "o" => c.o = num(key, value)?,
                "p" | "p_pref" => c.p_pref = num(key, value)?,
                "l" | "ell" => c.ell = num(key, value)?,
                "h" => c.h = num(key, value)?,
                "d" => c.d = num(key, value)?,
                _ => return Err(unknown()),
            },
            GeneratorConfig::Neighborhood(c) => match key {
                "m" => c.m = num(key, value)?,
                "n" => c.n = num(key, value)?,
                "r" => c.r = num(key, value)?,
                "h" => c.h = num(key, value)?,
                "M" | "scale" => c.scale = num(key, value)?,
                _ => return Err(unknown()),
            },
            GeneratorConfig::Popularity(c) => match key {
                "m" => c.m = num(key, value)?,
                "n" => c.n = num(key, value)?,
                "e" => c.e = num(key, value)?,
                "Q" | "q" => c.q_max = num(key, value)?,
                "d" => c.d = num(key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }
}

/// Number of characteristics giving a mean bidder degree of about 8 with
/// 8 options and 7 preferred: `ceil(log(8/n) / log(7/8))`, floored at zero
/// (for `n <= 8` every bidder then accepts every item).
pub fn preset_characteristics_count(n: usize) -> usize {
    let c = ((8.0 / n as f64).ln() / (7.0_f64 / 8.0).ln()).ceil();
    if c > 0.0 {
        c as usize
    } else {
        0
    }
}

/// Experiment presets with `m = n`.
pub fn preset(model: Model, n: usize) -> Result<GeneratorConfig> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("preset size must be at least 2, got {n}")));
    }
    Ok(match model {
        Model::Characteristics => GeneratorConfig::Characteristics(CharacteristicsConfig {
            m: n,
            n,
            c: preset_characteristics_count(n),
            o: 8,
            p_pref: 7,
            ell: 1.0,
            h: 100.0,
            d: 0.25,
        }),
        Model::Neighborhood => GeneratorConfig::Neighborhood(NeighborhoodConfig {
            m: n,
            n,
            r: (8.0 / (n as f64 * std::f64::consts::PI)).sqrt(),
            h: 3.0,
            scale: 10.0,
        }),
        Model::Popularity => GeneratorConfig::Popularity(PopularityConfig {
            m: n,
            n,
            // eight edges per bidder, capped by the number of pairs
            e: (8 * n).min(n * n),
            q_max: 200.0,
            d: 0.25,
        }),
    })
}

pub(crate) fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig("m and n must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        match preset(Model::Characteristics, 100).unwrap() {
            GeneratorConfig::Characteristics(c) => {
                assert_eq!(c.c, 19);
                assert_eq!((c.o, c.p_pref, c.ell, c.h, c.d, c.m), (8, 7, 1.0, 100.0, 0.25, 100));
            }
            _ => unreachable!(),
        }
        match preset(Model::Popularity, 300).unwrap() {
            GeneratorConfig::Popularity(c) => assert_eq!((c.e, c.q_max, c.d), (2400, 200.0, 0.25)),
            _ => unreachable!(),
        }
        match preset(Model::Neighborhood, 500).unwrap() {
            GeneratorConfig::Neighborhood(c) => {
                assert!((c.r - 0.071_364).abs() < 1e-5, "{}", c.r);
                assert_eq!((c.h, c.scale), (3.0, 10.0));
            }
            _ => unreachable!(),
        }
        assert!(preset(Model::Popularity, 1).is_err());
    }

    #[test]
    fn characteristics_count_small_sizes() {
        assert_eq!(preset_characteristics_count(8), 0);
        assert_eq!(preset_characteristics_count(5), 0);
        assert_eq!(preset_characteristics_count(10), 2);
        assert_eq!(preset_characteristics_count(50), 14);
    }

    #[test]
    fn overrides_round_trip_through_pairs() {
        for model in Model::ALL {
            let cfg = preset(model, 40).unwrap();
            let mut other = preset(model, 12).unwrap();
            for (k, v) in cfg.to_pairs() {
                other.set(k, &v).unwrap();
            }
            assert_eq!(cfg, other);
        }
        let mut cfg = preset(Model::Popularity, 10).unwrap();
        assert!(cfg.set("zz", "1").is_err());
        assert!(cfg.set("e", "many").is_err());
    }

    #[test]
    fn model_names() {
        for model in Model::ALL {
            assert_eq!(model.name().parse::<Model>().unwrap(), model);
        }
        assert!("bundles".parse::<Model>().is_err());
    }
}
