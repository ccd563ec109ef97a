//! Tidy CSV tables for coefficients, matrices, trajectories and replicate
//! summaries. Reals are written in shortest round-trip form, so reading a
//! table back reproduces the values exactly.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::ancestral::{Coefficients, PartitionMatrix};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::measure::{Measure, TypeSpace};
use crate::moran::{AncestralState, PopulationState};
use crate::partition::{Partition, PartitionIndex};

fn parse_real(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("{what}: {field:?} is not a number")))
}

fn parse_int(field: &str, what: &str) -> Result<u64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("{what}: {field:?} is not a nonnegative integer")))
}

fn header<R: Read>(r: &mut csv::Reader<R>) -> Result<Vec<String>> {
    Ok(r.headers()?.iter().map(str::to_owned).collect())
}

fn expect_header(found: &[String], expected: &[&str]) -> Result<()> {
    if found != expected {
        return Err(Error::domain(format!("expected columns {expected:?}, found {found:?}")));
    }
    Ok(())
}

/// `partition,a_t`, one row per partition in index order.
pub fn write_coefficients<W: Write>(w: W, c: &Coefficients<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["partition", "a_t"])?;
    for (a, v) in c.iter() {
        out.write_record([a.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_coefficients<R: Read>(r: R, index: &Arc<PartitionIndex>) -> Result<Coefficients<f64>> {
    let mut rd = csv::Reader::from_reader(r);
    expect_header(&header(&mut rd)?, &["partition", "a_t"])?;
    let mut values = vec![0.0; index.len()];
    let mut seen = vec![false; index.len()];
    for rec in rd.records() {
        let rec = rec?;
        let a: Partition = rec[0].parse()?;
        let i = index.require(&a)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::domain(format!("partition {a} listed twice")));
        }
        values[i] = parse_real(&rec[1], "a_t")?;
    }
    Coefficients::new(index.clone(), values)
}

/// Square table: a `partition` column naming the row, then one column per
/// partition in index order.
pub fn write_matrix<W: Write>(w: W, m: &PartitionMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["partition".to_owned()];
    head.extend(m.index().iter().map(Partition::to_string));
    out.write_record(&head)?;
    for (i, a) in m.index().iter().enumerate() {
        let mut row = vec![a.to_string()];
        row.extend(m.row(i).iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(r: R, index: &Arc<PartitionIndex>) -> Result<PartitionMatrix<f64>> {
    let mut rd = csv::Reader::from_reader(r);
    let head = header(&mut rd)?;
    let mut expected = vec!["partition".to_owned()];
    expected.extend(index.iter().map(Partition::to_string));
    if head != expected {
        return Err(Error::domain("matrix columns do not match the partition index"));
    }
    let mut m = PartitionMatrix::zeros(index.clone());
    let mut rows = 0;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if i >= index.len() || rec[0].parse::<Partition>()? != *index.get(i) {
            return Err(Error::domain(format!("row {} does not match the partition index", i + 1)));
        }
        for j in 0..index.len() {
            m.set(i, j, parse_real(&rec[j + 1], "matrix entry")?);
        }
        rows += 1;
    }
    if rows != index.len() {
        return Err(Error::domain(format!("{rows} rows for {} partitions", index.len())));
    }
    Ok(m)
}

/// `t`, then one column per type labelled like `0:1:1`, in mixed-radix order.
pub fn write_trajectory<W: Write>(w: W, tr: &Trajectory<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some(first) = tr.states.first() else {
        return Err(Error::domain("empty trajectory"));
    };
    let space = first.space();
    let mut head = vec!["t".to_owned()];
    head.extend((0..space.cardinality()).map(|x| space.label(x)));
    out.write_record(&head)?;
    for (t, w) in tr.iter() {
        let mut row = vec![t.to_string()];
        row.extend(w.to_dense().iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R, space: &TypeSpace) -> Result<Trajectory<f64>> {
    let mut rd = csv::Reader::from_reader(r);
    let head = header(&mut rd)?;
    let mut expected = vec!["t".to_owned()];
    expected.extend((0..space.cardinality()).map(|x| space.label(x)));
    if head != expected {
        return Err(Error::domain("trajectory columns do not match the type space"));
    }
    let mut tr = Trajectory { times: Vec::new(), states: Vec::new() };
    for rec in rd.records() {
        let rec = rec?;
        tr.times.push(parse_real(&rec[0], "t")?);
        let masses = (1..rec.len()).map(|j| parse_real(&rec[j], "mass")).collect::<Result<Vec<_>>>()?;
        // Masses of a signed or drifted state must survive unchanged.
        let mut m = Measure::zero(space);
        for (x, v) in masses.into_iter().enumerate() {
            m.add_at(x as u64, v);
        }
        tr.states.push(m);
    }
    Ok(tr)
}

/// One `replicate,t,type,count` row per type present.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranRecord {
    pub replicate: u64,
    pub t: f64,
    pub letters: Vec<usize>,
    pub count: u64,
}

pub fn write_moran<'a, W: Write>(w: W, states: impl IntoIterator<Item = (u64, f64, &'a PopulationState)>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["replicate", "t", "type", "count"])?;
    for (r, t, z) in states {
        for (x, c) in z.iter() {
            out.write_record([r.to_string(), t.to_string(), z.space().label(x), c.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_label(s: &str) -> Result<Vec<usize>> {
    s.split(':')
        .map(|x| x.trim().parse().map_err(|_| Error::domain(format!("bad type label {s:?}"))))
        .collect()
}

pub fn read_moran<R: Read>(r: R) -> Result<Vec<MoranRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    expect_header(&header(&mut rd)?, &["replicate", "t", "type", "count"])?;
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(MoranRecord {
                replicate: parse_int(&rec[0], "replicate")?,
                t: parse_real(&rec[1], "t")?,
                letters: parse_label(&rec[2])?,
                count: parse_int(&rec[3], "count")?,
            })
        })
        .collect()
}

/// One `replicate,partition,ancestors` row per genealogy.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgRecord {
    pub replicate: u64,
    pub partition: Partition,
    pub ancestors: u64,
}

pub fn write_arg<'a, W: Write>(w: W, states: impl IntoIterator<Item = (u64, &'a AncestralState)>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["replicate", "partition", "ancestors"])?;
    for (r, a) in states {
        out.write_record([r.to_string(), a.partition().to_string(), a.individuals().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_arg<R: Read>(r: R) -> Result<Vec<ArgRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    expect_header(&header(&mut rd)?, &["replicate", "partition", "ancestors"])?;
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ArgRecord {
                replicate: parse_int(&rec[0], "replicate")?,
                partition: rec[1].parse()?,
                ancestors: parse_int(&rec[2], "ancestors")?,
            })
        })
        .collect()
}
