//! CSV readers and writers for measures and samples.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::SpherePoint;
use crate::model::DiscreteMeasure;
use crate::sampler::ChainOutput;
use crate::Result;

#[derive(Serialize, Deserialize)]
struct PlaneRow {
    re: f64,
    im: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct LineRow {
    x: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct SphereRow {
    x1: f64,
    x2: f64,
    x3: f64,
    weight: f64,
}

/// One particle of one recorded sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub chain: usize,
    pub sweep: usize,
    pub particle: usize,
    pub re: f64,
    pub im: f64,
}

impl SampleRow {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Writes `re,im,weight`, or `x,weight` when `real` is set.
pub fn write_plane_measure<W: Write>(w: W, mu: &DiscreteMeasure<Complex64>, real: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for &(p, weight) in mu.atoms() {
        if real {
            out.serialize(LineRow { x: p.re, weight })?;
        } else {
            out.serialize(PlaneRow {
                re: p.re,
                im: p.im,
                weight,
            })?;
        }
    }
    if mu.is_empty() {
        let header: &[&str] = if real {
            &["x", "weight"]
        } else {
            &["re", "im", "weight"]
        };
        out.write_record(header)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads either plane layout, chosen by the header.
pub fn read_plane_measure<R: Read>(r: R) -> Result<DiscreteMeasure<Complex64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let atoms: Vec<(Complex64, f64)> = if headers.iter().any(|h| h == "x") {
        rdr.deserialize::<LineRow>()
            .map(|row| row.map(|r| (Complex64::new(r.x, 0.0), r.weight)))
            .collect::<std::result::Result<_, _>>()?
    } else {
        rdr.deserialize::<PlaneRow>()
            .map(|row| row.map(|r| (Complex64::new(r.re, r.im), r.weight)))
            .collect::<std::result::Result<_, _>>()?
    };
    DiscreteMeasure::new(atoms)
}

/// Writes `x1,x2,x3,weight`; the point at infinity is the north pole.
pub fn write_sphere_measure<W: Write>(w: W, nu: &DiscreteMeasure<SpherePoint>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for &(z, weight) in nu.atoms() {
        let [x1, x2, x3] = z.coords();
        out.serialize(SphereRow { x1, x2, x3, weight })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sphere_measure<R: Read>(r: R) -> Result<DiscreteMeasure<SpherePoint>> {
    let mut rdr = csv::Reader::from_reader(r);
    let atoms = rdr
        .deserialize::<SphereRow>()
        .map(|row| row.map(|r| (SpherePoint::new(r.x1, r.x2, r.x3), r.weight)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    DiscreteMeasure::new(atoms)
}

/// Writes `chain,sweep,particle,re,im`, ordered by chain, then sweep, then
/// particle.
pub fn write_samples<W: Write>(w: W, chains: &[ChainOutput]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut sorted: Vec<&ChainOutput> = chains.iter().collect();
    sorted.sort_by_key(|c| c.chain);
    for c in sorted {
        for rec in &c.samples {
            for (particle, p) in rec.config.points().iter().enumerate() {
                out.serialize(SampleRow {
                    chain: c.chain,
                    sweep: rec.sweep,
                    particle,
                    re: p.re,
                    im: p.im,
                })?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<Vec<SampleRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<SampleRow>, _>>()?;
    Ok(rows)
}
