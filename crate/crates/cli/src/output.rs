//! Artifact directory, manifest and worker fan-out.

use std::path::PathBuf;

use anyhow::{Context, Result};
use filament_core::io::{create_file, write_json, Table};
use serde::Serialize;

use crate::config::{Format, Globals, CONFIG_VERSION};

/// Collects the artifacts of one run and writes its manifest.
pub struct Output {
    dir: PathBuf,
    format: Format,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    config_version: u64,
    subcommand: &'a str,
    format: Format,
    threads: usize,
    parameters: &'a P,
    artifacts: &'a [String],
}

impl Output {
    pub fn new(globals: &Globals) -> Result<Self> {
        std::fs::create_dir_all(&globals.out)
            .with_context(|| format!("creating output directory {}", globals.out.display()))?;
        Ok(Self {
            dir: globals.out.clone(),
            format: globals.format,
            artifacts: Vec::new(),
        })
    }

    /// Write `table` as `<stem>.csv` or `<stem>.json` depending on the format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let name = match self.format {
            Format::Csv => format!("{stem}.csv"),
            Format::Json => format!("{stem}.json"),
        };
        let file = create_file(&self.dir.join(&name))?;
        match self.format {
            Format::Csv => table.write_csv(file)?,
            Format::Json => table.write_json(file)?,
        }
        self.artifacts.push(name);
        Ok(())
    }

    /// Write `value` as pretty JSON to `<stem>.json`.
    pub fn json<T: Serialize + ?Sized>(&mut self, stem: &str, value: &T) -> Result<()> {
        let name = format!("{stem}.json");
        write_json(create_file(&self.dir.join(&name))?, value)?;
        self.artifacts.push(name);
        Ok(())
    }

    /// Write `manifest.json` with everything needed to repeat the run.
    pub fn finish<P: Serialize>(
        self,
        subcommand: &str,
        globals: &Globals,
        params: &P,
    ) -> Result<()> {
        let manifest = Manifest {
            tool: "filament",
            version: filament_core::VERSION,
            config_version: CONFIG_VERSION,
            subcommand,
            format: globals.format,
            threads: globals.threads,
            parameters: params,
            artifacts: &self.artifacts,
        };
        write_json(create_file(&self.dir.join("manifest.json"))?, &manifest)?;
        Ok(())
    }
}

/// Apply `f` to every item on up to `threads` workers; results keep the
/// order of `items` and the first failure (in item order) is returned.
pub fn par_map<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let workers = threads.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<Result<R>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..items.len())
                        .step_by(workers)
                        .map(|i| (i, f(&items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut slots: Vec<Option<Result<R>>> = (0..items.len()).map(|_| None).collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
        slots
    });
    slots
        .iter_mut()
        .map(|s| s.take().expect("every index visited"))
        .collect()
}
