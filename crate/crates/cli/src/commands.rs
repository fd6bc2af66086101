//! Dispatch from command names to library operations.

use lepage_core::charts::{check_caratheodory_invariance, check_theta_invariance, obstruction_3rd, standard_family};
use lepage_core::lepage::{
    caratheodory_closed, caratheodory_contraction, check_lepage, euler_lagrange, euler_lagrange_expressions,
    fundamental_form, principal_component,
};
use lepage_core::relativity::{einstein_el, hilbert_caratheodory, hilbert_theta, MetricJetSpace, Signature};
use lepage_core::Error;

use crate::emit::{Format, OutputDocument, Payload, PrintBasis};
use crate::error::CliError;
use crate::problem::ProblemFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Theta,
    Fundamental,
    Caratheodory,
    CaratheodoryClosed,
    EulerLagrange,
    CheckLepage,
    CheckInvariance,
    Obstruction,
    HilbertTheta,
    HilbertCaratheodory,
    Einstein,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;

fn metric_legend(doc: &mut OutputDocument, n: usize) -> Result<(), CliError> {
    let ms = MetricJetSpace::new(n, Signature::Riemannian, 2)?;
    let m = n * (n + 1) / 2;
    let names: Vec<String> = (1..=m as u16)
        .map(|s| {
            let (a, b) = ms.pair(s);
            format!("y{s} = g{a}{b}")
        })
        .collect();
    doc.push("", Payload::Note(names.join(", ")));
    Ok(())
}

/// Runs one command. The exit code is 0 on success or when a checked
/// property holds and 1 when it fails; errors carry their own codes.
pub fn run_command(
    cmd: Command,
    problem: &ProblemFile,
    format: Format,
    basis: PrintBasis,
) -> Result<(OutputDocument, i32), CliError> {
    let mut doc = OutputDocument { format, basis, sections: Vec::new() };
    let mut code = EXIT_OK;
    match cmd {
        Command::Theta => {
            let l = problem.lagrangian()?;
            doc.push("theta", Payload::Form(principal_component(&l)?));
        }
        Command::Fundamental => {
            let l = problem.lagrangian()?;
            doc.push("fundamental", Payload::Form(fundamental_form(&l)?));
        }
        Command::Caratheodory => {
            let l = problem.lagrangian()?;
            doc.push("caratheodory", Payload::Decomposable(caratheodory_contraction(&l)?));
        }
        Command::CaratheodoryClosed => {
            let l = problem.lagrangian()?;
            doc.push("caratheodory", Payload::Decomposable(caratheodory_closed(&l)?));
        }
        Command::EulerLagrange => {
            let l = problem.lagrangian()?;
            doc.push("euler-lagrange", Payload::Form(euler_lagrange(&l)?));
            for (k, e) in euler_lagrange_expressions(&l)?.into_iter().enumerate() {
                doc.push(format!("E{}", k + 1), Payload::Expr(e));
            }
        }
        Command::CheckLepage => {
            let l = problem.lagrangian()?;
            let report = check_lepage(&principal_component(&l)?, &l)?;
            doc.push("equivalent", Payload::Flag(report.equivalent_ok));
            doc.push("lepage", Payload::Flag(report.lepage_ok));
            if !report.lepage_ok {
                doc.push("residual", Payload::Form(report.residual));
            }
            if !(report.equivalent_ok && report.lepage_ok) {
                code = EXIT_FAILS;
            }
        }
        Command::CheckInvariance => {
            let l = problem.lagrangian()?;
            let family = if problem.transforms.is_empty() {
                doc.push("", Payload::Note("no transform given; using the standard test family".into()));
                standard_family(problem.space)?
            } else {
                problem.chart_transforms()?
            };
            for (k, t) in family.iter().enumerate() {
                let ok = check_theta_invariance(&l, t)?;
                doc.push(format!("theta[{}]", k + 1), Payload::Flag(ok));
                code = code.max(if ok { EXIT_OK } else { EXIT_FAILS });
                if l.is_nonvanishing() {
                    let ok = match check_caratheodory_invariance(&l, t) {
                        Ok(b) => b,
                        Err(Error::ObstructionViolated) => {
                            doc.push("", Payload::Note("third-order obstruction does not vanish".into()));
                            false
                        }
                        Err(e) => return Err(e.into()),
                    };
                    doc.push(format!("caratheodory[{}]", k + 1), Payload::Flag(ok));
                    code = code.max(if ok { EXIT_OK } else { EXIT_FAILS });
                }
            }
        }
        Command::Obstruction => {
            let l = problem.lagrangian()?;
            let family = if problem.transforms.is_empty() {
                doc.push("", Payload::Note("no transform given; using the standard test family".into()));
                standard_family(problem.space)?
            } else {
                problem.chart_transforms()?
            };
            let mut holds = true;
            let mut flux_free = true;
            for (k, t) in family.iter().enumerate() {
                let report = obstruction_3rd(&l, t)?;
                for ((sigma, s), e) in report.residuals {
                    doc.push(format!("residual[{},{sigma},{s}]", k + 1), Payload::Expr(e));
                }
                holds &= report.holds;
                flux_free &= report.strict_holds;
            }
            doc.push("obstruction", Payload::Flag(holds));
            doc.push("flux-free", Payload::Flag(flux_free));
            if !holds {
                code = EXIT_FAILS;
            }
        }
        Command::HilbertTheta => {
            metric_legend(&mut doc, problem.base)?;
            doc.push("theta", Payload::Form(hilbert_theta(problem.base)?));
        }
        Command::HilbertCaratheodory => {
            metric_legend(&mut doc, problem.base)?;
            doc.push("caratheodory", Payload::Decomposable(hilbert_caratheodory(problem.base)?));
        }
        Command::Einstein => {
            metric_legend(&mut doc, problem.base)?;
            doc.push("einstein", Payload::Form(einstein_el(problem.base)?));
        }
    }
    Ok((doc, code))
}
