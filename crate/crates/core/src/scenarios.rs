//! Builders for the canonical setups: a Mach-Zehnder interferometer, the
//! two-arm entangled-pair interferometer, and induced-coherence imaging with
//! undetected idlers.
//!
//! Port wiring is fixed so that, with the default symmetric beam splitters,
//! the constructive MZI port and the entangled-pair sign pattern come out
//! without any extra calibration phase.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::circuit::{Arm, Circuit, Detector, Element, ModeId, Segment, Source};
use crate::dsl::eval_phase_expr;
use crate::entanglement::{arm_detectors, joint_table, ProbabilityTable};
use crate::error::{Error, Result};

pub mod mzi {
    pub const SOURCE: &str = "S";
    pub const SHIFTER: &str = "F";
    /// Output port that is bright at Φ = 0.
    pub const CONSTRUCTIVE: &str = "D6";
    pub const DARK: &str = "D7";
}

pub mod jaeger {
    pub const PAIR: &str = "P";
    pub const SHIFTER_1: &str = "F1";
    pub const SHIFTER_2: &str = "F2";
    pub const U1: &str = "U1";
    pub const L1: &str = "L1";
    pub const U2: &str = "U2";
    pub const L2: &str = "L2";
}

pub mod lemos {
    pub const PAIR: &str = "NL";
    pub const OBJECT: &str = "O";
    pub const G: &str = "Dg";
    pub const H: &str = "Dh";
    pub const IDLER: &str = "Di";
    pub const IDLER_DUMP: &str = "Dx";
}

fn m(s: &str) -> ModeId {
    ModeId::from(s)
}

/// Single photon into BS1, arms via mirrors M1 and Mb, shifter Φ on the
/// Mb arm, recombined at BS2.
pub fn build_mzi(phase_value: f64) -> Circuit {
    Circuit {
        sources: vec![
            Source::single(mzi::SOURCE, m("e1")),
            Source::vacuum("V", m("e0")),
        ],
        elements: vec![
            Element::beam_splitter("BS1", [m("e1"), m("e0")], [m("e2"), m("e3")]),
            Element::mirror("M1", m("e3"), m("e4")),
            Element::mirror("Mb", m("e2"), m("e5")),
            Element::phase_shifter(mzi::SHIFTER, m("e5"), m("e6"), phase_value),
            Element::beam_splitter("BS2", [m("e4"), m("e6")], [m("p6"), m("p7")]),
        ],
        segments: vec![],
        detectors: vec![
            Detector::new(mzi::CONSTRUCTIVE, m("p6")),
            Detector::new(mzi::DARK, m("p7")),
        ],
    }
}

/// Pair source with two emission branches. Photon 1 meets H1, photon 2
/// meets H2; Φ1 and Φ2 sit on the top-branch legs. The U ports are the
/// transmit ports of the top-branch inputs.
pub fn build_jaeger(phi1: f64, phi2: f64) -> Circuit {
    Circuit {
        sources: vec![Source::pair(
            jaeger::PAIR,
            (m("a1"), m("a2")),
            (m("b1"), m("b2")),
        )],
        elements: vec![
            Element::phase_shifter(jaeger::SHIFTER_1, m("a1"), m("a1p"), phi1),
            Element::beam_splitter("H1", [m("a1p"), m("b1")], [m("u1"), m("l1")]),
            Element::phase_shifter(jaeger::SHIFTER_2, m("a2"), m("a2p"), phi2),
            Element::beam_splitter("H2", [m("a2p"), m("b2")], [m("u2"), m("l2")]),
        ],
        segments: vec![],
        detectors: vec![
            Detector::new(jaeger::U1, m("u1")),
            Detector::new(jaeger::L1, m("l1")),
            Detector::new(jaeger::U2, m("u2")),
            Detector::new(jaeger::L2, m("l2")),
        ],
    }
}

pub fn jaeger_table(circuit: &Circuit) -> Result<ProbabilityTable> {
    joint_table(
        circuit,
        jaeger::PAIR,
        &[jaeger::U1, jaeger::L1],
        &[jaeger::U2, jaeger::L2],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LemosOptions {
    pub object_phase: f64,
    /// Send NL1's idler to its own detector instead of aligning it with
    /// NL2's idler mode.
    pub distinguishable: bool,
}

/// Two crystals in pump superposition, modelled as the two branches of one
/// pair source: top = emission at NL1 (signal s1, idler i1), bottom =
/// emission at NL2 (signal s2, idler i). NL1's idler crosses the object and
/// then travels in NL2's idler mode `i`. Signals meet at BS into g and h.
/// The idler is never conditioned on; signal statistics sum over it.
pub fn build_lemos(object_phase: f64) -> Circuit {
    build_lemos_with(LemosOptions {
        object_phase,
        distinguishable: false,
    })
}

pub fn build_lemos_with(options: LemosOptions) -> Circuit {
    let object_out = if options.distinguishable {
        m("ix")
    } else {
        m("i")
    };
    let mut detectors = vec![
        Detector::new(lemos::G, m("g")),
        Detector::new(lemos::H, m("h")),
        Detector::new(lemos::IDLER, m("i")),
    ];
    if options.distinguishable {
        detectors.push(Detector::new(lemos::IDLER_DUMP, m("ix")));
    }
    Circuit {
        sources: vec![Source::pair(
            lemos::PAIR,
            (m("s1"), m("i1")),
            (m("s2"), m("i")),
        )],
        elements: vec![
            Element::phase_shifter(lemos::OBJECT, m("i1"), object_out, options.object_phase),
            Element::beam_splitter("BS", [m("s1"), m("s2")], [m("g"), m("h")]),
        ],
        // calibrates g to be fully bright at object phase 0
        segments: vec![Segment::new(m("s1"), FRAC_PI_2)],
        detectors,
    }
}

/// Signal probabilities `(P(g), P(h))`, summed over every idler outcome.
pub fn lemos_probabilities(circuit: &Circuit) -> Result<(f64, f64)> {
    let idlers = arm_detectors(circuit, lemos::PAIR, Arm::Two)?;
    let idlers: Vec<&str> = idlers.iter().map(String::as_str).collect();
    let table = joint_table(circuit, lemos::PAIR, &[lemos::G, lemos::H], &idlers)?;
    Ok((table.marginals[lemos::G], table.marginals[lemos::H]))
}

/// Per-pixel object phases, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseImage {
    width: usize,
    height: usize,
    phases: Vec<f64>,
}

impl PhaseImage {
    pub fn new(width: usize, height: usize, phases: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || phases.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} needs {} values, got {}",
                width * height,
                phases.len()
            )));
        }
        Ok(PhaseImage {
            width,
            height,
            phases,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidImage("rows differ in length".into()));
        }
        Self::new(width, height, rows.into_iter().flatten().collect())
    }

    /// Parse a CSV grid, one image row per line. Cells are phase
    /// expressions in radians (`0`, `pi`, `pi/2`, `1.3`). Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(c, cell)| {
                    eval_phase_expr(cell.trim()).map_err(|e| {
                        Error::InvalidImage(format!("line {} cell {}: {}", n + 1, c + 1, e.message))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.phases[row * self.width + col]
    }
}

/// Intensity grids at the two signal outputs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImagePair {
    pub width: usize,
    pub height: usize,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl IntensityImagePair {
    pub fn g_at(&self, row: usize, col: usize) -> f64 {
        self.g[row * self.width + col]
    }

    pub fn h_at(&self, row: usize, col: usize) -> f64 {
        self.h[row * self.width + col]
    }

    pub fn g_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.g.chunks(self.width)
    }

    pub fn h_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.h.chunks(self.width)
    }
}

/// Write a row-major grid as CSV with LF line endings, formatting each value
/// with `fmt`.
pub fn write_grid_csv<W: Write>(
    mut out: W,
    width: usize,
    values: &[f64],
    fmt: impl Fn(f64) -> String,
) -> io::Result<()> {
    for row in values.chunks(width.max(1)) {
        let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn lemos_image(image: &PhaseImage) -> Result<IntensityImagePair> {
    lemos_image_with(image, false)
}

/// Evaluate the imaging setup independently for every pixel.
pub fn lemos_image_with(image: &PhaseImage, distinguishable: bool) -> Result<IntensityImagePair> {
    let pixels: Vec<(f64, f64)> = image
        .phases
        .par_iter()
        .map(|&object_phase| {
            lemos_probabilities(&build_lemos_with(LemosOptions {
                object_phase,
                distinguishable,
            }))
        })
        .collect::<Result<_>>()?;
    let (g, h) = pixels.into_iter().unzip();
    Ok(IntensityImagePair {
        width: image.width,
        height: image.height,
        g,
        h,
    })
}
