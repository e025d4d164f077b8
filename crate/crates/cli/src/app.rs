//! Argument handling for the `nvfem` binary, kept in the library so it can be
//! exercised in-process.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "nvfem", version, about = "Nonvariational finite element experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Convergence study for a manufactured Gauss curvature problem.
    Converge(Flags),
    /// Constant-curvature sweep with zero boundary data.
    Sweep(Flags),
    /// Linear nonvariational solve on a built-in case.
    SolveLinear(Flags),
    /// Generate, describe and save the mesh hierarchy.
    MeshInfo(Flags),
}

#[derive(Args)]
struct Flags {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    half_width: Option<String>,
    #[arg(long)]
    perturb: Option<String>,
    /// Comma-separated curvature values.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    /// quartic | exponential | constant-k
    #[arg(long)]
    problem: Option<String>,
    /// identity | spd | manufactured
    #[arg(long)]
    case: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        [
            ("levels", &self.levels),
            ("n", &self.n),
            ("half_width", &self.half_width),
            ("perturb", &self.perturb),
            ("k", &self.k),
            ("seed", &self.seed),
            ("out", &self.out),
            ("max_iter", &self.max_iter),
            ("tol", &self.tol),
            ("damping", &self.damping),
            ("problem", &self.problem),
            ("case", &self.case),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

/// Everything a run would print, plus its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution { code: 1, stdout: String::new(), stderr: text }
            } else {
                Execution { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let (command, flags) = match cli.command {
        Cmd::Converge(f) => (Command::Converge, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::SolveLinear(f) => (Command::SolveLinear, f),
        Cmd::MeshInfo(f) => (Command::MeshInfo, f),
    };
    match RunConfig::load(command, flags.config.as_deref(), &flags.overrides()).and_then(|cfg| run(&cfg)) {
        Ok(report) => Execution {
            code: report.outcome.exit_code() as u8,
            stdout: report.text,
            stderr: report.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        },
        Err(e) => Execution { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use nvfem_core::mesh::load_mesh;

    use super::execute;
    use crate::output::{parse_csv, parse_field, CONVERGENCE_HEADER, SWEEP_HEADER};

    fn nvfem(args: &[&str]) -> (i32, String, String) {
        let run = execute(std::iter::once("nvfem").chain(args.iter().copied()));
        (run.code as i32, run.stdout, run.stderr)
    }

    fn dir_arg(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn converge_writes_table_fields_and_meshes() {
        let dir = tempfile::tempdir().unwrap();
        let (code, stdout, stderr) =
            nvfem(&["converge", "--n", "2", "--levels", "3", "--problem", "exponential", "--out", dir_arg(dir.path())]);
        assert_eq!(code, 0, "{stderr}");
        let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        assert_eq!(stdout, csv);
        assert_eq!(csv.lines().next(), Some(CONVERGENCE_HEADER));
        let rows = parse_csv(&csv);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0][4], "");
        assert!(rows[2][4].parse::<f64>().unwrap() > 2.0);
        for level in 0..3 {
            let mesh =
                load_mesh(&std::fs::read_to_string(dir.path().join(format!("mesh_{level}.txt"))).unwrap()).unwrap();
            let field = parse_field(&std::fs::read_to_string(dir.path().join(format!("field_u_{level}.dat"))).unwrap())
                .unwrap();
            assert_eq!(field.values.len(), mesh.num_vertices() + mesh.edges().len());
            assert_eq!(field.cells.len(), mesh.num_cells());
            assert!(dir.path().join(format!("field_h12_{level}.dat")).exists());
        }
    }

    #[test]
    fn config_file_with_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, format!("# linear run\ncase = spd\nn = 1\nlevels = 3\nout = {}\n", dir_arg(dir.path())))
            .unwrap();
        let (code, stdout, stderr) = nvfem(&["solve-linear", "--config", cfg.to_str().unwrap(), "--levels", "2"]);
        assert_eq!(code, 0, "{stderr}");
        let rows = parse_csv(&stdout);
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert!(row[3].parse::<f64>().unwrap() < 1e-9);
        }
        assert!(dir.path().join("field_u_spd.dat").exists());
    }

    #[test]
    fn sweep_reports_failures_in_the_table() {
        let dir = tempfile::tempdir().unwrap();
        let (code, stdout, stderr) = nvfem(&[
            "sweep",
            "--n",
            "2",
            "--levels",
            "1",
            "--k",
            "0.5,2",
            "--max-iter",
            "2",
            "--out",
            dir_arg(dir.path()),
        ]);
        assert_eq!(code, 2, "{stderr}");
        assert!(stderr.contains("warning"));
        assert_eq!(stdout.lines().next(), Some(SWEEP_HEADER));
        let rows = parse_csv(&stdout);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.len() == 5 && r[1] == "false"));
    }

    #[test]
    fn config_errors_exit_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir_arg(dir.path());
        for args in [
            vec!["converge", "--levels", "1", "--out", out],
            vec!["sweep", "--k", "-1", "--out", out],
            vec!["sweep", "--k", "abc", "--out", out],
            vec!["solve-linear", "--case", "unknown", "--out", out],
            vec!["converge", "--problem", "constant-k", "--out", out],
            vec!["mesh-info", "--config", "/nonexistent/run.cfg"],
            vec!["frobnicate"],
        ] {
            let (code, _, stderr) = nvfem(&args);
            assert_eq!(code, 1, "{args:?}: {stderr}");
            assert!(!stderr.is_empty());
        }
        let bad = dir.path().join("bad.cfg");
        std::fs::write(&bad, "n = 2\ncolour = blue\n").unwrap();
        let (code, _, stderr) = nvfem(&["mesh-info", "--config", bad.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(stderr.contains("line 2"), "{stderr}");
    }

    #[test]
    fn unwritable_output_exits_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "").unwrap();
        let (code, _, _) = nvfem(&["mesh-info", "--out", blocker.join("sub").to_str().unwrap()]);
        assert_eq!(code, 1);
    }

    #[test]
    fn mesh_info_files_match_the_summary() {
        let dir = tempfile::tempdir().unwrap();
        let (code, stdout, _) =
            nvfem(&["mesh-info", "--n", "3", "--levels", "2", "--seed", "4", "--out", dir_arg(dir.path())]);
        assert_eq!(code, 0);
        let rows = parse_csv(&stdout);
        assert_eq!(rows[0][2], "36");
        assert_eq!(rows[1][2], "144");
        let m = load_mesh(&std::fs::read_to_string(dir.path().join("mesh_1.txt")).unwrap()).unwrap();
        assert_eq!(m.num_cells(), 144);
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let (code, _, stderr) = nvfem(&[
                "converge",
                "--n",
                "2",
                "--levels",
                "2",
                "--seed",
                "11",
                "--problem",
                "exponential",
                "--out",
                dir_arg(dir.path()),
            ]);
            assert_eq!(code, 0, "{stderr}");
            (
                std::fs::read(dir.path().join("convergence.csv")).unwrap(),
                std::fs::read(dir.path().join("field_u_1.dat")).unwrap(),
            )
        };
        assert_eq!(run(), run());
    }
}
