//! Key strings naming a combination of algorithm settings, e.g.
//! `LP_100_0.1_50_FKM`: swarm variant and knot map letters, then SNR,
//! regulator gain and iteration count, then end knot, end B-spline and
//! knot adjustment letters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapesError};
use crate::knotmap::{EndKnots, KnotAdjust, KnotMapOptions, MapKind};
use crate::model_search::ShapesConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub map: MapKind,
    pub snr: f64,
    pub lambda: f64,
    pub num_iterations: usize,
    pub end_knots: EndKnots,
    pub drop_end_bsplines: bool,
    pub adjust: KnotAdjust,
}

impl Label {
    pub fn parse(s: &str) -> Result<Self> {
        let err = |field| ShapesError::Label { label: s.to_string(), field };
        let parts: Vec<&str> = s.split('_').collect();
        if parts.len() != 5 {
            return Err(err("layout"));
        }
        let head: Vec<char> = parts[0].chars().collect();
        let tail: Vec<char> = parts[4].chars().collect();
        if head.len() != 2 {
            return Err(err("pso/map"));
        }
        if head[0] != 'L' {
            return Err(err("pso variant"));
        }
        let map = match head[1] {
            'P' => MapKind::Plain,
            'C' => MapKind::CenteredMonotonic,
            _ => return Err(err("map")),
        };
        let snr: f64 = parts[1].parse().map_err(|_| err("snr"))?;
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(err("snr"));
        }
        let lambda: f64 = parts[2].parse().map_err(|_| err("lambda"))?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(err("lambda"));
        }
        let num_iterations: usize = parts[3].parse().map_err(|_| err("iterations"))?;
        if num_iterations == 0 {
            return Err(err("iterations"));
        }
        if tail.len() != 3 {
            return Err(err("end knots/end b-splines/adjustment"));
        }
        let end_knots = match tail[0] {
            'F' => EndKnots::Fixed,
            'V' => EndKnots::Variable,
            _ => return Err(err("end knots")),
        };
        let drop_end_bsplines = match tail[1] {
            'K' => false,
            'D' => true,
            _ => return Err(err("end b-splines")),
        };
        let adjust = match tail[2] {
            'M' => KnotAdjust::Merge,
            'H' => KnotAdjust::Heal,
            _ => return Err(err("knot adjustment")),
        };
        Ok(Self { map, snr, lambda, num_iterations, end_knots, drop_end_bsplines, adjust })
    }

    /// Pipeline settings named by the label; everything else at its default.
    pub fn config<T: Scalar>(&self) -> ShapesConfig<T> {
        let mut config = ShapesConfig::new(T::lit(self.lambda), self.num_iterations);
        self.apply(&mut config);
        config
    }

    /// Overwrites the settings the label names.
    pub fn apply<T: Scalar>(&self, config: &mut ShapesConfig<T>) {
        config.lambda = T::lit(self.lambda);
        config.swarm.num_iterations = self.num_iterations;
        config.drop_end_bsplines = self.drop_end_bsplines;
        config.knots = KnotMapOptions {
            map_kind: self.map,
            end_knots: self.end_knots,
            adjust: self.adjust,
            order: config.knots.order,
        };
    }

    pub fn from_config<T: Scalar>(snr: T, config: &ShapesConfig<T>) -> Self {
        Self {
            map: config.knots.map_kind,
            snr: snr.as_f64(),
            lambda: config.lambda.as_f64(),
            num_iterations: config.swarm.num_iterations,
            end_knots: config.knots.end_knots,
            drop_end_bsplines: config.drop_end_bsplines,
            adjust: config.knots.adjust,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let map = match self.map {
            MapKind::Plain => 'P',
            MapKind::CenteredMonotonic => 'C',
        };
        let ends = match self.end_knots {
            EndKnots::Fixed => 'F',
            EndKnots::Variable => 'V',
        };
        let bsplines = if self.drop_end_bsplines { 'D' } else { 'K' };
        let adjust = match self.adjust {
            KnotAdjust::Merge => 'M',
            KnotAdjust::Heal => 'H',
        };
        write!(
            f,
            "L{map}_{}_{}_{}_{ends}{bsplines}{adjust}",
            self.snr, self.lambda, self.num_iterations
        )
    }
}

impl FromStr for Label {
    type Err = ShapesError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_fields() {
        let l = Label::parse("LP_100_0.1_50_FKM").unwrap();
        assert_eq!(l.map, MapKind::Plain);
        assert_eq!(l.snr, 100.0);
        assert_eq!(l.lambda, 0.1);
        assert_eq!(l.num_iterations, 50);
        assert_eq!(l.end_knots, EndKnots::Fixed);
        assert!(!l.drop_end_bsplines);
        assert_eq!(l.adjust, KnotAdjust::Merge);
        assert_eq!(l.to_string(), "LP_100_0.1_50_FKM");

        let l = Label::parse("LC_10_5_80_VDH").unwrap();
        assert_eq!(l.map, MapKind::CenteredMonotonic);
        assert!(l.drop_end_bsplines);
        assert_eq!(l.to_string(), "LC_10_5_80_VDH");
    }

    #[test]
    fn names_bad_field() {
        let field = |s: &str| match Label::parse(s) {
            Err(ShapesError::Label { field, .. }) => field,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(field("XX_100_0.1_50_FKM"), "pso variant");
        assert_eq!(field("LX_100_0.1_50_FKM"), "map");
        assert_eq!(field("LP_abc_0.1_50_FKM"), "snr");
        assert_eq!(field("LP_100_-1_50_FKM"), "lambda");
        assert_eq!(field("LP_100_0.1_0_FKM"), "iterations");
        assert_eq!(field("LP_100_0.1_50_XKM"), "end knots");
        assert_eq!(field("LP_100_0.1_50_FXM"), "end b-splines");
        assert_eq!(field("LP_100_0.1_50_FKX"), "knot adjustment");
        assert_eq!(field("LP_100_0.1"), "layout");
    }

    #[test]
    fn config_roundtrip() {
        let l = Label::parse("LC_10_5_50_VDH").unwrap();
        let c: ShapesConfig<f64> = l.config();
        assert_eq!(c.lambda, 5.0);
        assert_eq!(c.swarm.num_iterations, 50);
        assert_eq!(Label::from_config(10.0, &c), l);
    }
}
