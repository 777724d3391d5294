//! Executes parsed documents: builds diagrams/tensors for expressions,
//! runs checks and evals, renders normalized diagrams.

use crate::dsl::{Atom, Document, Expr, Scalar, Stmt, Term};
use num_complex::Complex64 as C64;
use quon_core::numerics::{tensor_compose, tensor_kron, Tensor};
use quon_core::qudit_core::{GateName, SpiderColor};
use quon_core::quon_calculus::{eval_word, StrandWord, WordGen};
use quon_core::spider_engine::{
    compose_diagrams, eval_tensor, fbox_diagram, gate_diagram, identity_diagram,
    juxtapose_diagrams, normalize, spider_diagram, wire_diagram, SpiderDiagram,
};
use quon_core::suite::{CheckRecord, CheckStatus};
use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

#[derive(Debug)]
pub struct ExecError(pub String);

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ExecError {}

enum Def {
    Expr(Expr),
    Word(Vec<WordGen>),
}

pub struct Session {
    d: Option<usize>,
    defs: Vec<(String, Def)>,
    index: HashMap<String, usize>,
}

impl Session {
    fn new() -> Self {
        Session {
            d: None,
            defs: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn d(&self) -> Result<usize, ExecError> {
        self.d
            .ok_or_else(|| ExecError("a 'dim' statement must precede expressions".into()))
    }

    fn lookup(&self, name: &str) -> Result<&Def, ExecError> {
        self.index
            .get(name)
            .map(|&i| &self.defs[i].1)
            .ok_or_else(|| ExecError(format!("unknown name '{name}'")))
    }

    fn build_diagram_atom(&self, atom: &Atom) -> Result<SpiderDiagram, ExecError> {
        let d = self.d()?;
        let sqrt_d = (d as f64).sqrt();
        Ok(match atom {
            Atom::Id(k) => identity_diagram(d, *k),
            Atom::Cap => spider_diagram(d, SpiderColor::Black, 2, 0),
            Atom::Cup => spider_diagram(d, SpiderColor::Black, 0, 2),
            Atom::BSpider(i, o) => spider_diagram(d, SpiderColor::Black, *i, *o),
            Atom::WSpider(i, o) => spider_diagram(d, SpiderColor::White, *i, *o),
            Atom::F => fbox_diagram(d, 1),
            Atom::F2 => fbox_diagram(d, 2),
            Atom::G => gate_diagram(d, GateName::G),
            Atom::X => gate_diagram(d, GateName::X),
            Atom::Y => gate_diagram(d, GateName::Y),
            Atom::Z => gate_diagram(d, GateName::Z),
            Atom::Cnot => gate_diagram(d, GateName::Cnot),
            Atom::Ghz(n) => {
                if *n == 0 {
                    return Err(ExecError("ghz needs at least one leg".into()));
                }
                let mut g = spider_diagram(d, SpiderColor::Black, 0, *n);
                g.scalar *= C64::new(1.0 / sqrt_d, 0.0);
                g
            }
            Atom::Max(n) => {
                if *n == 0 {
                    return Err(ExecError("max needs at least one leg".into()));
                }
                let mut g = spider_diagram(d, SpiderColor::White, 0, *n);
                g.scalar *= C64::new((d as f64).powf((1.0 - *n as f64) / 2.0), 0.0);
                g
            }
            Atom::BellPlus => {
                let mut g = spider_diagram(d, SpiderColor::Black, 0, 2);
                g.scalar *= C64::new(1.0 / sqrt_d, 0.0);
                g
            }
            Atom::BellMinus => {
                let mut g = spider_diagram(d, SpiderColor::Black, 0, 2);
                g.scalar *= C64::new(1.0 / sqrt_d, 0.0);
                let lift = juxtapose_diagrams(&wire_diagram(d), &fbox_diagram(d, 2))
                    .map_err(|e| ExecError(e.to_string()))?;
                compose_diagrams(&lift, &g).map_err(|e| ExecError(e.to_string()))?
            }
            Atom::Name(name) => match self.lookup(name)? {
                Def::Expr(e) => self.build_diagram_expr(e)?,
                Def::Word(_) => {
                    return Err(ExecError(format!(
                        "'{name}' is a braid word; words have no diagram form"
                    )))
                }
            },
            Atom::Paren(e) => self.build_diagram_expr(e)?,
        })
    }

    pub fn build_diagram_expr(&self, expr: &Expr) -> Result<SpiderDiagram, ExecError> {
        let mut acc: Option<SpiderDiagram> = None;
        for term in &expr.terms {
            let t = self.build_diagram_term(term)?;
            acc = Some(match acc {
                None => t,
                // first listed applied first
                Some(prev) => compose_diagrams(&t, &prev).map_err(|e| ExecError(e.to_string()))?,
            });
        }
        acc.ok_or_else(|| ExecError("empty expression".into()))
    }

    fn build_diagram_term(&self, term: &Term) -> Result<SpiderDiagram, ExecError> {
        let mut acc: Option<SpiderDiagram> = None;
        for atom in &term.atoms {
            let a = self.build_diagram_atom(atom)?;
            acc = Some(match acc {
                None => a,
                Some(prev) => {
                    juxtapose_diagrams(&prev, &a).map_err(|e| ExecError(e.to_string()))?
                }
            });
        }
        acc.ok_or_else(|| ExecError("empty term".into()))
    }

    fn tensor_of_atom(&self, atom: &Atom) -> Result<Tensor, ExecError> {
        match atom {
            Atom::Name(name) => match self.lookup(name)? {
                Def::Expr(e) => self.tensor_of_expr(e),
                Def::Word(gens) => {
                    let d = self.d()?;
                    Ok(eval_word(&StrandWord::new(d, gens.clone())))
                }
            },
            Atom::Paren(e) => self.tensor_of_expr(e),
            _ => {
                let diag = self.build_diagram_atom(atom)?;
                eval_tensor(&diag).map_err(|e| ExecError(e.to_string()))
            }
        }
    }

    pub fn tensor_of_expr(&self, expr: &Expr) -> Result<Tensor, ExecError> {
        let mut acc: Option<Tensor> = None;
        for term in &expr.terms {
            let mut term_acc: Option<Tensor> = None;
            for atom in &term.atoms {
                let t = self.tensor_of_atom(atom)?;
                term_acc = Some(match term_acc {
                    None => t,
                    Some(prev) => tensor_kron(&prev, &t).map_err(|e| ExecError(e.to_string()))?,
                });
            }
            let t = term_acc.ok_or_else(|| ExecError("empty term".into()))?;
            acc = Some(match acc {
                None => t,
                Some(prev) => tensor_compose(&t, &prev).map_err(|e| ExecError(e.to_string()))?,
            });
        }
        acc.ok_or_else(|| ExecError("empty expression".into()))
    }

    fn scalar_value(&self, s: &Scalar) -> Result<C64, ExecError> {
        Ok(match s {
            Scalar::DPow(num, den) => {
                let d = self.d()? as f64;
                C64::new(d.powf(*num as f64 / *den as f64), 0.0)
            }
            Scalar::Complex(re, im) => C64::new(*re, *im),
        })
    }
}

pub struct RunOutcome {
    pub records: Vec<CheckRecord>,
    pub output: String,
    pub dims: Vec<usize>,
}

fn tensor_text(label: &str, t: &Tensor) -> String {
    let mut out = format!(
        "{label}: tensor d={} out={} in={}\n",
        t.d(),
        t.out_legs(),
        t.in_legs()
    );
    let legs = t.out_legs() + t.in_legs();
    let d = t.d();
    for (flat, v) in t.entries().iter().enumerate() {
        let mut idx = vec![0usize; legs];
        let mut rem = flat;
        for slot in (0..legs).rev() {
            idx[slot] = rem % d;
            rem /= d;
        }
        let (outs, ins) = idx.split_at(t.out_legs());
        out.push_str(&format!(
            "  [{}|{}] = {:+.6}{:+.6}i\n",
            outs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            ins.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            v.re,
            v.im
        ));
    }
    out
}

/// Runs a document: executes every check and eval in order.
pub fn run_document(doc: &Document, tol: f64) -> Result<RunOutcome, ExecError> {
    let mut session = Session::new();
    let mut records = Vec::new();
    let mut output = String::new();
    let mut check_no = 0usize;
    let mut eval_no = 0usize;
    let mut dims = Vec::new();
    for stmt in &doc.stmts {
        match stmt {
            Stmt::Dim(d) => {
                if *d == 0 {
                    return Err(ExecError("dimension must be at least 1".into()));
                }
                session.d = Some(*d);
                if !dims.contains(d) {
                    dims.push(*d);
                }
            }
            Stmt::LetExpr(name, e) => {
                session.defs.push((name.clone(), Def::Expr(e.clone())));
                session.index.insert(name.clone(), session.defs.len() - 1);
            }
            Stmt::LetWord(name, gens) => {
                session.defs.push((name.clone(), Def::Word(gens.clone())));
                session.index.insert(name.clone(), session.defs.len() - 1);
            }
            Stmt::Check { lhs, rhs, scalar } => {
                check_no += 1;
                let started = Instant::now();
                let name = format!(
                    "check-{check_no}: {} == {}",
                    crate::dsl::render_expr(lhs),
                    crate::dsl::render_expr(rhs)
                );
                let outcome = (|| -> Result<(f64, Option<C64>), ExecError> {
                    let lt = session.tensor_of_expr(lhs)?;
                    let mut rt = session.tensor_of_expr(rhs)?;
                    let s = match scalar {
                        Some(s) => {
                            let v = session.scalar_value(s)?;
                            rt = rt.scale(v);
                            Some(v)
                        }
                        None => None,
                    };
                    if lt.d() != rt.d()
                        || lt.out_legs() != rt.out_legs()
                        || lt.in_legs() != rt.in_legs()
                    {
                        return Err(ExecError("check sides have different shapes".into()));
                    }
                    Ok((lt.max_abs_diff(&rt), s))
                })();
                let record = match outcome {
                    Ok((err, scalar)) => CheckRecord {
                        name,
                        status: if err <= tol {
                            CheckStatus::Pass
                        } else {
                            CheckStatus::Fail
                        },
                        max_error: err,
                        scalar,
                        runtime_ms: started.elapsed().as_millis(),
                    },
                    Err(e) => {
                        output.push_str(&format!("error in {name}: {e}\n"));
                        CheckRecord {
                            name,
                            status: CheckStatus::Error,
                            max_error: -1.0,
                            scalar: None,
                            runtime_ms: started.elapsed().as_millis(),
                        }
                    }
                };
                output.push_str(&format!(
                    "{} [{}] max_error={:.3e}\n",
                    record.name,
                    record.status.as_str(),
                    record.max_error
                ));
                records.push(record);
            }
            Stmt::Eval(e) => {
                eval_no += 1;
                let label = format!("eval-{eval_no}: {}", crate::dsl::render_expr(e));
                let t = session.tensor_of_expr(e)?;
                output.push_str(&tensor_text(&label, &t));
            }
        }
    }
    Ok(RunOutcome {
        records,
        output,
        dims,
    })
}

/// Renders the normal form of every diagrammable definition and eval target.
pub fn normalize_document(doc: &Document) -> Result<String, ExecError> {
    let mut session = Session::new();
    let mut out = String::new();
    for stmt in &doc.stmts {
        match stmt {
            Stmt::Dim(d) => session.d = Some(*d),
            Stmt::LetExpr(name, e) => {
                session.defs.push((name.clone(), Def::Expr(e.clone())));
                session.index.insert(name.clone(), session.defs.len() - 1);
                let diag = session.build_diagram_expr(e)?;
                let normal = normalize(&diag);
                out.push_str(&format!("normalize {name}:\n{}\n", normal.render()));
            }
            Stmt::LetWord(name, _) => {
                out.push_str(&format!("normalize {name}: braid word (no diagram form)\n"));
            }
            Stmt::Eval(e) => {
                let diag = session.build_diagram_expr(e)?;
                let normal = normalize(&diag);
                out.push_str(&format!(
                    "normalize eval {}:\n{}\n",
                    crate::dsl::render_expr(e),
                    normal.render()
                ));
            }
            Stmt::Check { .. } => {}
        }
    }
    Ok(out)
}
