//! Campaign output files. Every artifact embeds the resolved config hash
//! and the root seed; identical configs reproduce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::evolve::{GenerationRecord, GenerationSink, Individual};

use super::CampaignError;

/// Provenance stamp placed at the top of CSV artifacts and inside JSON ones.
#[derive(Debug, Clone, Copy)]
pub struct Stamp<'a> {
    pub config_hash: &'a str,
    pub seed: u64,
}

impl Stamp<'_> {
    pub fn comment_line(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed)
    }
}

pub fn create_csv(path: &Path, stamp: &Stamp<'_>, header: &str) -> Result<BufWriter<File>, CampaignError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{}", stamp.comment_line())?;
    writeln!(file, "{header}")?;
    Ok(file)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CampaignError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CampaignError::Config(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn generation_row(generation: usize, individual: &Individual, is_elite: bool) -> String {
    let idx = individual.shape.indices.expect("campaign individuals are grid shapes");
    let t = individual.shape.theta_deg;
    format!(
        "{},{},{},{},{:.6},{:.6},{:.6},{:.9},{}",
        generation,
        idx[0],
        idx[1],
        idx[2],
        t[0],
        t[1],
        t[2],
        individual.fitness_n.unwrap_or(f64::NAN),
        u8::from(is_elite)
    )
}

pub const GENERATION_LOG_HEADER: &str =
    "generation,i1,i2,i3,theta1_deg,theta2_deg,theta3_deg,fitness_N,is_elite";

/// Streams generation records into the campaign's `generations.csv`,
/// flushing after each generation so aborted runs keep their history.
pub struct GenerationLog {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl GenerationLog {
    pub fn create(dir: &Path, stamp: &Stamp<'_>) -> Result<Self, CampaignError> {
        let path = dir.join("generations.csv");
        let writer = create_csv(&path, stamp, GENERATION_LOG_HEADER)?;
        Ok(Self { writer, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl GenerationSink for GenerationLog {
    fn persist(&mut self, record: &GenerationRecord) -> Result<(), String> {
        let elite_keys: Vec<_> = record.elites.iter().map(|e| e.chromosome).collect();
        for individual in &record.population {
            let is_elite = elite_keys.contains(&individual.chromosome);
            writeln!(self.writer, "{}", generation_row(record.index, individual, is_elite))
                .map_err(|e| e.to_string())?;
        }
        self.writer.flush().map_err(|e| e.to_string())
    }
}

/// Per-generation elite history (`elites_history.csv`): the drag level of
/// each elite as a function of generation number.
pub fn write_elite_history(
    dir: &Path,
    stamp: &Stamp<'_>,
    records: &[GenerationRecord],
) -> Result<(), CampaignError> {
    let mut file =
        create_csv(&dir.join("elites_history.csv"), stamp, "generation,rank,i1,i2,i3,fitness_N")?;
    for record in records {
        for (rank, elite) in record.elites.iter().enumerate() {
            let idx = elite.shape.indices.expect("grid shape");
            writeln!(
                file,
                "{},{},{},{},{},{:.9}",
                record.index,
                rank,
                idx[0],
                idx[1],
                idx[2],
                elite.fitness_n.unwrap_or(f64::NAN)
            )?;
        }
    }
    file.flush()?;
    Ok(())
}

/// Writes the raw/filtered series and the binned means used for the
/// dynamic-morph figures: `<stem>.csv` with `t_s,raw_N,filtered_N` and
/// `<stem>_bins.csv` with `t_s,mean_N`.
pub fn write_plot_data(
    dir: &Path,
    stem: &str,
    stamp: &Stamp<'_>,
    sample_rate_hz: f64,
    raw: &[f64],
    filtered: &[f64],
    bins: &[(f64, f64)],
) -> Result<(), CampaignError> {
    let mut series = create_csv(&dir.join(format!("{stem}.csv")), stamp, "t_s,raw_N,filtered_N")?;
    for (i, (r, f)) in raw.iter().zip(filtered).enumerate() {
        writeln!(series, "{:.6},{:.9},{:.9}", i as f64 / sample_rate_hz, r, f)?;
    }
    series.flush()?;
    let mut binned = create_csv(&dir.join(format!("{stem}_bins.csv")), stamp, "t_s,mean_N")?;
    for (t, m) in bins {
        writeln!(binned, "{t:.6},{m:.9}")?;
    }
    binned.flush()?;
    Ok(())
}
