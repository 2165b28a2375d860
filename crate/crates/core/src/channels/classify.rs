//! Membership tests for the incoherent-operation hierarchy
//! GIO ⊂ FSIO ⊂ {FIO, SIO} ⊂ IO ⊂ MIO.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use super::kraus::KrausSet;
use crate::qstate::{ComplexMatrix, Permutation};

pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Off-diagonal moduli allowed in the image of a basis projector for MIO.
pub const MIO_TOL: f64 = 1e-10;

/// Positions of entries with modulus above the zero tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    entries: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    pub fn of(m: &ComplexMatrix, zero_tol: f64) -> Self {
        let mut entries = BTreeSet::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)].norm() > zero_tol {
                    entries.insert((i, j));
                }
            }
        }
        Self {
            dim: m.rows(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &BTreeSet<(usize, usize)> {
        &self.entries
    }

    pub fn rows_in_column(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .filter(move |&&(_, c)| c == col)
            .map(|&(r, _)| r)
    }

    pub fn cols_in_row(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .filter(move |&&(r, _)| r == row)
            .map(|&(_, c)| c)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c)| r == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassFlags {
    pub gio: bool,
    pub fsio: bool,
    pub fio: bool,
    pub sio: bool,
    pub io: bool,
    pub mio: bool,
}

impl ClassFlags {
    /// Lattice inclusions: gio ⇒ fsio ⇒ (fio ∧ sio), fio ∨ sio ⇒ io ⇒ mio.
    pub fn is_lattice_consistent(&self) -> bool {
        let implies = |a: bool, b: bool| !a || b;
        implies(self.gio, self.fsio)
            && implies(self.fsio, self.fio)
            && implies(self.fsio, self.sio)
            && implies(self.fio, self.io)
            && implies(self.sio, self.io)
            && implies(self.io, self.mio)
    }
}

/// Smallest class of the lattice containing a channel. FIO and SIO are
/// incomparable, so a set in both but not FSIO is reported as `FioAndSio`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncoherentClass {
    Gio,
    Fsio,
    FioAndSio,
    Fio,
    Sio,
    Io,
    Mio,
    None,
}

impl IncoherentClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Gio => "GIO",
            Self::Fsio => "FSIO",
            Self::FioAndSio => "FIO+SIO",
            Self::Fio => "FIO",
            Self::Sio => "SIO",
            Self::Io => "IO",
            Self::Mio => "MIO",
            Self::None => "none",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            Self::Gio,
            Self::Fsio,
            Self::FioAndSio,
            Self::Fio,
            Self::Sio,
            Self::Io,
            Self::Mio,
            Self::None,
        ]
        .into_iter()
        .find(|c| c.label() == s)
    }

    fn of(flags: &ClassFlags) -> Self {
        match flags {
            f if f.gio => Self::Gio,
            f if f.fsio => Self::Fsio,
            f if f.fio && f.sio => Self::FioAndSio,
            f if f.fio => Self::Fio,
            f if f.sio => Self::Sio,
            f if f.io => Self::Io,
            f if f.mio => Self::Mio,
            _ => Self::None,
        }
    }
}

impl fmt::Display for IncoherentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Operator has two nonzero entries in one column (not IO).
    ColumnConflict,
    /// Operator has two nonzero entries in one row (not SIO).
    RowConflict,
    /// Operators send a column to different rows (not the same form).
    FormMismatch,
    /// Shared form sends two columns to one row (not a permutation).
    NonInjectiveForm,
    /// Image of a basis projector has coherence (not MIO).
    CreatesCoherence,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ColumnConflict => "column_conflict",
            Self::RowConflict => "row_conflict",
            Self::FormMismatch => "form_mismatch",
            Self::NonInjectiveForm => "non_injective_form",
            Self::CreatesCoherence => "creates_coherence",
        }
    }
}

/// Entry-level evidence against a class. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending operator, when the violation belongs to one.
    pub kraus_index: Option<usize>,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// FSIO witness `K_n = U_pi A_n`; `completed` lists columns that are zero
    /// in every operator and were assigned the smallest unused row.
    Permutation {
        pi: Permutation,
        diagonal_factors: Vec<Vec<Complex64>>,
        completed: Vec<usize>,
    },
    /// FIO witness: shared partial column-to-row map.
    ColumnMap { map: Vec<Option<usize>> },
    Violation(Violation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelClassification {
    pub flags: ClassFlags,
    pub most_specific: IncoherentClass,
    pub certificate: Option<Certificate>,
}

/// Classifies a Kraus set within the incoherent-operation hierarchy.
pub fn classify_kraus(kraus: &KrausSet, zero_tol: f64) -> ChannelClassification {
    let d = kraus.dim();
    let patterns: Vec<SparsityPattern> = kraus
        .operators()
        .iter()
        .map(|k| SparsityPattern::of(k, zero_tol))
        .collect();

    let mut first_violation: Option<Violation> = None;
    let note = |v: Violation, slot: &mut Option<Violation>| {
        if slot.is_none() {
            *slot = Some(v);
        }
    };

    // IO: at most one entry per column in every operator
    let mut io = true;
    'io: for (n, p) in patterns.iter().enumerate() {
        for col in 0..d {
            let rows: Vec<usize> = p.rows_in_column(col).collect();
            if rows.len() > 1 {
                io = false;
                note(
                    Violation {
                        kind: ViolationKind::ColumnConflict,
                        kraus_index: Some(n),
                        row: rows[1],
                        col,
                    },
                    &mut first_violation,
                );
                break 'io;
            }
        }
    }

    // SIO: IO plus at most one entry per row
    let mut sio = io;
    if io {
        'sio: for (n, p) in patterns.iter().enumerate() {
            for row in 0..d {
                let cols: Vec<usize> = p.cols_in_row(row).collect();
                if cols.len() > 1 {
                    sio = false;
                    note(
                        Violation {
                            kind: ViolationKind::RowConflict,
                            kraus_index: Some(n),
                            row,
                            col: cols[1],
                        },
                        &mut first_violation,
                    );
                    break 'sio;
                }
            }
        }
    }

    // FIO: IO plus one column-to-row map shared by all operators
    let mut form: Vec<Option<usize>> = vec![None; d];
    let mut fio = io;
    if io {
        'fio: for (n, p) in patterns.iter().enumerate() {
            for &(row, col) in p.entries() {
                match form[col] {
                    None => form[col] = Some(row),
                    Some(r) if r == row => {}
                    Some(_) => {
                        fio = false;
                        note(
                            Violation {
                                kind: ViolationKind::FormMismatch,
                                kraus_index: Some(n),
                                row,
                                col,
                            },
                            &mut first_violation,
                        );
                        break 'fio;
                    }
                }
            }
        }
    }

    // FSIO: the shared form must extend to a permutation
    let mut fsio = fio;
    let mut certificate = None;
    if fio {
        let mut used = vec![false; d];
        for col in 0..d {
            if let Some(row) = form[col] {
                if std::mem::replace(&mut used[row], true) {
                    fsio = false;
                    note(
                        Violation {
                            kind: ViolationKind::NonInjectiveForm,
                            kraus_index: None,
                            row,
                            col,
                        },
                        &mut first_violation,
                    );
                    break;
                }
            }
        }
        if fsio {
            let mut completed = Vec::new();
            let mut map = Vec::with_capacity(d);
            for col in 0..d {
                let row = match form[col] {
                    Some(r) => r,
                    None => {
                        let r = (0..d).find(|&r| !used[r]).expect("a free row remains");
                        used[r] = true;
                        completed.push(col);
                        r
                    }
                };
                map.push(row);
            }
            let pi = Permutation::new(map).expect("injective completion is a bijection");
            let diagonal_factors = kraus
                .operators()
                .iter()
                .map(|k| (0..d).map(|i| k[(pi.image(i), i)]).collect())
                .collect();
            certificate = Some(Certificate::Permutation {
                pi,
                diagonal_factors,
                completed,
            });
        } else {
            certificate = Some(Certificate::ColumnMap { map: form.clone() });
        }
    }

    let gio = patterns.iter().all(SparsityPattern::is_diagonal);
    debug_assert!(!gio || fsio);

    let (mio_test, mio_violation) = mio_basis_test(kraus);
    if let Some(v) = mio_violation {
        note(v, &mut first_violation);
    }

    let flags = ClassFlags {
        gio,
        fsio,
        fio,
        sio: sio && io,
        io,
        // IO maps incoherent states to incoherent states exactly
        mio: mio_test || io,
    };
    debug_assert!(flags.is_lattice_consistent());

    if certificate.is_none() {
        certificate = first_violation.map(Certificate::Violation);
    }

    ChannelClassification {
        most_specific: IncoherentClass::of(&flags),
        flags,
        certificate,
    }
}

/// Applies the channel to every basis projector and looks for coherence.
fn mio_basis_test(kraus: &KrausSet) -> (bool, Option<Violation>) {
    let d = kraus.dim();
    for i in 0..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        let out = kraus.apply_matrix(&e);
        for r in 0..d {
            for c in 0..d {
                if r != c && out[(r, c)].norm() > MIO_TOL {
                    return (
                        false,
                        Some(Violation {
                            kind: ViolationKind::CreatesCoherence,
                            kraus_index: None,
                            row: r,
                            col: i,
                        }),
                    );
                }
            }
        }
    }
    (true, None)
}
