//! Parameterized-circuit IR: ordered gates arranged into moments
//! (time slices), plus the structural transforms the mitigation
//! techniques need (inversion, unitary folding, decoupling insertion).
//!
//! Circuits separate immutable *structure* (gates, moments, parameter
//! slots) from *bindings* (slot angle values), so parameter-shift
//! evaluations rebind angles without rebuilding the gate list. Gates are
//! stored flat with moment offsets, which makes folding a bulk copy.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Gate vocabulary: fixed Paulis, identity, Pauli rotations, the composite
/// single-qubit rotation Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi),
/// and the controlled-Z entangler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    X,
    Y,
    Z,
    I,
    Ry,
    Rz,
    Rot,
    Cz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rot => 3,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::I => "I",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rot => "Rot",
            GateKind::Cz => "CZ",
        }
    }
}

/// An angle argument: either a literal value or a reference to a symbolic
/// parameter slot (possibly negated, as produced by circuit inversion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Fixed(f64),
    Slot { index: usize, negated: bool },
}

impl Param {
    pub fn slot(index: usize) -> Self {
        Param::Slot {
            index,
            negated: false,
        }
    }

    fn negate(self) -> Self {
        match self {
            Param::Fixed(a) => Param::Fixed(-a),
            Param::Slot { index, negated } => Param::Slot {
                index,
                negated: !negated,
            },
        }
    }
}

/// One gate application. Gates are small and heap-free so circuit
/// transforms can copy them in bulk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [u8; 2],
    params: [Param; 3],
    /// Bare gates bypass the noise model entirely. Used for the ideal
    /// recovery operations sampled by probabilistic error cancellation;
    /// decoupling pulses are *not* bare.
    pub bare: bool,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[Param]) -> Self {
        assert_eq!(qubits.len(), kind.arity(), "{} arity", kind.name());
        assert_eq!(
            params.len(),
            kind.param_count(),
            "{} parameter count",
            kind.name()
        );
        if kind.arity() == 2 {
            assert_ne!(qubits[0], qubits[1], "gate qubits must be distinct");
        }
        let mut q = [0u8; 2];
        for (dst, &src) in q.iter_mut().zip(qubits) {
            *dst = u8::try_from(src).expect("qubit index fits in u8");
        }
        let mut p = [Param::Fixed(0.0); 3];
        p[..params.len()].copy_from_slice(params);
        Self {
            kind,
            qubits: q,
            params: p,
            bare: false,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, &[q], &[])
    }

    pub fn y(q: usize) -> Self {
        Self::new(GateKind::Y, &[q], &[])
    }

    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, &[q], &[])
    }

    pub fn ident(q: usize) -> Self {
        Self::new(GateKind::I, &[q], &[])
    }

    pub fn ry(q: usize, angle: Param) -> Self {
        Self::new(GateKind::Ry, &[q], &[angle])
    }

    pub fn rz(q: usize, angle: Param) -> Self {
        Self::new(GateKind::Rz, &[q], &[angle])
    }

    pub fn rot(q: usize, phi: Param, theta: Param, omega: Param) -> Self {
        Self::new(GateKind::Rot, &[q], &[phi, theta, omega])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, &[a, b], &[])
    }

    pub fn bare(mut self) -> Self {
        self.bare = true;
        self
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.qubits[..self.kind.arity()].iter().map(|&q| q as usize)
    }

    pub fn params(&self) -> &[Param] {
        &self.params[..self.kind.param_count()]
    }

    /// Inverse gate: negated angles; fixed Paulis and CZ are self-inverse.
    /// Rot(phi, theta, omega)^-1 = Rot(-omega, -theta, -phi).
    pub fn inverse(&self) -> Self {
        let mut g = *self;
        match self.kind {
            GateKind::Ry | GateKind::Rz => g.params[0] = self.params[0].negate(),
            GateKind::Rot => {
                g.params[0] = self.params[2].negate();
                g.params[1] = self.params[1].negate();
                g.params[2] = self.params[0].negate();
            }
            _ => {}
        }
        g
    }
}

/// Flat gate storage plus moment offsets: moment m spans
/// `gates[offsets[m]..offsets[m + 1]]`.
#[derive(Debug, PartialEq)]
struct CircuitStructure {
    n_qubits: usize,
    gates: Vec<Gate>,
    offsets: Vec<u32>,
    n_slots: usize,
}

impl CircuitStructure {
    fn from_moments(n_qubits: usize, moments: Vec<Vec<Gate>>, n_slots: usize) -> Self {
        let mut gates = Vec::with_capacity(moments.iter().map(Vec::len).sum());
        let mut offsets = Vec::with_capacity(moments.len() + 1);
        offsets.push(0u32);
        for m in moments {
            gates.extend(m);
            offsets.push(gates.len() as u32);
        }
        Self {
            n_qubits,
            gates,
            offsets,
            n_slots,
        }
    }

    fn moment(&self, i: usize) -> &[Gate] {
        &self.gates[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    fn moment_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// A parameterized circuit: shared immutable structure plus the current
/// slot->angle bindings. Rebinding is cheap; transforms return new circuits.
#[derive(Debug, Clone)]
pub struct QuantumCircuit {
    structure: Arc<CircuitStructure>,
    bindings: Vec<f64>,
}

impl PartialEq for QuantumCircuit {
    fn eq(&self, other: &Self) -> bool {
        *self.structure == *other.structure && self.bindings == other.bindings
    }
}

impl QuantumCircuit {
    /// Greedy left-aligned moment construction: each gate lands in the
    /// earliest moment whose occupied qubits are free, never earlier than
    /// any moment holding a prior gate on a shared qubit.
    pub fn build_moments(gates: &[Gate], n_qubits: usize) -> Result<QuantumCircuit> {
        Self::build_moment_groups(&[gates], n_qubits).map(|(c, _)| c)
    }

    /// Like [`build_moments`](Self::build_moments), but each group is
    /// scheduled independently and concatenated, creating a barrier between
    /// groups. Returns the circuit and the starting moment index of each
    /// group (the group boundaries used for layerwise folding).
    pub fn build_moment_groups(
        groups: &[&[Gate]],
        n_qubits: usize,
    ) -> Result<(QuantumCircuit, Vec<usize>)> {
        let mut moments: Vec<Vec<Gate>> = Vec::new();
        let mut boundaries = Vec::with_capacity(groups.len());
        let mut n_slots = 0usize;
        for group in groups {
            boundaries.push(moments.len());
            let base = moments.len();
            // next_free[q]: first moment index (relative to base) where q is available
            let mut next_free = vec![0usize; n_qubits];
            for gate in group.iter() {
                for q in gate.qubits() {
                    if q >= n_qubits {
                        return Err(Error::QubitOutOfRange {
                            index: q,
                            n_qubits,
                        });
                    }
                }
                for p in gate.params() {
                    if let Param::Slot { index, .. } = p {
                        n_slots = n_slots.max(index + 1);
                    }
                }
                let slot = gate.qubits().map(|q| next_free[q]).max().unwrap_or(0);
                while moments.len() < base + slot + 1 {
                    moments.push(Vec::new());
                }
                moments[base + slot].push(*gate);
                for q in gate.qubits() {
                    next_free[q] = slot + 1;
                }
            }
        }
        let structure = CircuitStructure::from_moments(n_qubits, moments, n_slots);
        Ok((
            QuantumCircuit {
                bindings: vec![0.0; structure.n_slots],
                structure: Arc::new(structure),
            },
            boundaries,
        ))
    }

    pub fn n_qubits(&self) -> usize {
        self.structure.n_qubits
    }

    pub fn moment_count(&self) -> usize {
        self.structure.moment_count()
    }

    pub fn moment(&self, i: usize) -> &[Gate] {
        self.structure.moment(i)
    }

    pub fn moments(&self) -> impl Iterator<Item = &[Gate]> + '_ {
        (0..self.moment_count()).map(move |i| self.structure.moment(i))
    }

    pub fn gate_count(&self) -> usize {
        self.structure.gates.len()
    }

    /// Gates in execution order (moment order, then insertion order).
    pub fn flat_gates(&self) -> &[Gate] {
        &self.structure.gates
    }

    /// Number of symbolic parameter slots.
    pub fn slot_count(&self) -> usize {
        self.structure.n_slots
    }

    pub fn bindings(&self) -> &[f64] {
        &self.bindings
    }

    /// Same structure with new slot bindings.
    pub fn with_bindings(&self, bindings: Vec<f64>) -> QuantumCircuit {
        assert_eq!(bindings.len(), self.structure.n_slots, "binding count");
        QuantumCircuit {
            structure: Arc::clone(&self.structure),
            bindings,
        }
    }

    /// Resolve an angle argument against the current bindings.
    pub fn resolve(&self, param: Param) -> f64 {
        match param {
            Param::Fixed(a) => a,
            Param::Slot { index, negated } => {
                let v = self.bindings[index];
                if negated {
                    -v
                } else {
                    v
                }
            }
        }
    }

    fn rebuild(&self, gates: Vec<Gate>, offsets: Vec<u32>) -> QuantumCircuit {
        QuantumCircuit {
            structure: Arc::new(CircuitStructure {
                n_qubits: self.structure.n_qubits,
                gates,
                offsets,
                n_slots: self.structure.n_slots,
            }),
            bindings: self.bindings.clone(),
        }
    }

    /// Reversed moment order with each gate inverted.
    pub fn inverse(&self) -> QuantumCircuit {
        let s = &self.structure;
        let mut gates = Vec::with_capacity(s.gates.len());
        let mut offsets = Vec::with_capacity(s.offsets.len());
        offsets.push(0u32);
        for m in (0..s.moment_count()).rev() {
            gates.extend(s.moment(m).iter().map(Gate::inverse));
            offsets.push(gates.len() as u32);
        }
        self.rebuild(gates, offsets)
    }

    /// Global unitary folding G (G^dagger G)^((scale-1)/2). Unitarily
    /// equivalent to the input; the moment count is multiplied by `scale`.
    pub fn fold_global(&self, scale: u32) -> Result<QuantumCircuit> {
        if scale == 0 || scale % 2 == 0 {
            return Err(Error::InvalidFoldScale(scale));
        }
        if scale == 1 {
            return Ok(self.clone());
        }
        let inv = self.inverse();
        let s = scale as usize;
        let n_gates = self.structure.gates.len();
        let n_moments = self.moment_count();
        let mut gates = Vec::with_capacity(n_gates * s);
        let mut offsets = Vec::with_capacity(n_moments * s + 1);
        gates.extend_from_slice(&self.structure.gates);
        offsets.extend_from_slice(&self.structure.offsets);
        for _ in 0..(s - 1) / 2 {
            for part in [&inv.structure, &self.structure] {
                let base = gates.len() as u32;
                gates.extend_from_slice(&part.gates);
                offsets.extend(part.offsets[1..].iter().map(|&o| o + base));
            }
        }
        Ok(self.rebuild(gates, offsets))
    }

    /// Fold each contiguous moment group by its own odd scale and
    /// concatenate the results in order.
    pub fn fold_groups(&self, spec: &FoldSpec) -> Result<QuantumCircuit> {
        let n = self.moment_count();
        spec.validate(n)?;
        let mut gates = Vec::new();
        let mut offsets = vec![0u32];
        for (g, &start) in spec.group_boundaries.iter().enumerate() {
            let end = spec.group_boundaries.get(g + 1).copied().unwrap_or(n);
            let lo = self.structure.offsets[start] as usize;
            let hi = self.structure.offsets[end] as usize;
            let group = self.rebuild(
                self.structure.gates[lo..hi].to_vec(),
                self.structure.offsets[start..=end]
                    .iter()
                    .map(|&o| o - lo as u32)
                    .collect(),
            );
            let folded = group.fold_global(spec.scale_for_group(g))?;
            let base = gates.len() as u32;
            gates.extend_from_slice(&folded.structure.gates);
            offsets.extend(folded.structure.offsets[1..].iter().map(|&o| o + base));
        }
        Ok(self.rebuild(gates, offsets))
    }

    /// Insert a decoupling sequence into every idle window of length >= 2.
    ///
    /// For a window of k idle moments the slack rule inserts floor(k/2)
    /// adjacent pulse pairs left-aligned (XYXY blocks first when the
    /// sequence allows and k >= 4), leaving the remainder idle, so the
    /// inserted gates always compose to the identity map.
    pub fn insert_ddd(&self, sequence: DddSequence) -> QuantumCircuit {
        let n_moments = self.moment_count();
        let mut moments: Vec<Vec<Gate>> = self.moments().map(<[Gate]>::to_vec).collect();
        for q in 0..self.structure.n_qubits {
            let busy: Vec<bool> = self
                .moments()
                .map(|m| m.iter().any(|g| g.qubits().any(|gq| gq == q)))
                .collect();
            let mut start = 0usize;
            while start < n_moments {
                if busy[start] {
                    start += 1;
                    continue;
                }
                let mut end = start;
                while end < n_moments && !busy[end] {
                    end += 1;
                }
                let window = end - start;
                if window >= 2 {
                    for (offset, kind) in sequence.fill(window) {
                        let gate = match kind {
                            GateKind::X => Gate::x(q),
                            GateKind::Y => Gate::y(q),
                            _ => unreachable!("decoupling pulses are X or Y"),
                        };
                        moments[start + offset].push(gate);
                    }
                }
                start = end;
            }
        }
        let structure =
            CircuitStructure::from_moments(self.structure.n_qubits, moments, self.structure.n_slots);
        QuantumCircuit {
            structure: Arc::new(structure),
            bindings: self.bindings.clone(),
        }
    }

    /// Plain-text moment table: one line per moment, gate names with qubit
    /// indices and resolved angles to 6 decimals. Used for golden-file tests.
    pub fn moment_table(&self) -> String {
        let mut out = String::new();
        for (i, moment) in self.moments().enumerate() {
            let _ = write!(out, "m{i}:");
            for gate in moment {
                let qubits: Vec<String> = gate.qubits().map(|q| format!("q{q}")).collect();
                let _ = write!(out, " {}({}", gate.kind.name(), qubits.join(","));
                if gate.kind.param_count() > 0 {
                    let angles: Vec<String> = gate
                        .params()
                        .iter()
                        .map(|&p| format!("{:.6}", self.resolve(p)))
                        .collect();
                    let _ = write!(out, "; {}", angles.join(", "));
                }
                let _ = write!(out, ")");
            }
            out.push('\n');
        }
        out
    }
}

/// Decoupling pulse sequences. XX is the default; XYXY is used for idle
/// windows of at least four moments and falls back to XX pairs for the
/// remaining slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DddSequence {
    Xx,
    Xyxy,
}

impl DddSequence {
    /// Pulse placements (moment offset within the window, pulse kind) for an
    /// idle window of the given length.
    fn fill(self, window: usize) -> Vec<(usize, GateKind)> {
        let mut out = Vec::new();
        let mut pos = 0usize;
        if self == DddSequence::Xyxy {
            while window - pos >= 4 {
                out.push((pos, GateKind::X));
                out.push((pos + 1, GateKind::Y));
                out.push((pos + 2, GateKind::X));
                out.push((pos + 3, GateKind::Y));
                pos += 4;
            }
        }
        while window - pos >= 2 {
            out.push((pos, GateKind::X));
            out.push((pos + 1, GateKind::X));
            pos += 2;
        }
        out
    }
}

/// Folding specification for layerwise noise scaling: group boundaries are
/// the starting moment indices of each contiguous group (the first must
/// be 0), and each group gets its own odd fold scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSpec {
    pub per_group_scales: Vec<u32>,
    pub group_boundaries: Vec<usize>,
}

impl FoldSpec {
    pub fn new(per_group_scales: Vec<u32>, group_boundaries: Vec<usize>) -> Self {
        Self {
            per_group_scales,
            group_boundaries,
        }
    }

    fn scale_for_group(&self, g: usize) -> u32 {
        self.per_group_scales[g]
    }

    fn validate(&self, n_moments: usize) -> Result<()> {
        if self.group_boundaries.is_empty() || self.group_boundaries[0] != 0 {
            return Err(Error::InvalidConfig(
                "group boundaries must start at moment 0".into(),
            ));
        }
        if self.per_group_scales.len() != self.group_boundaries.len() {
            return Err(Error::InvalidConfig(format!(
                "{} scales for {} groups",
                self.per_group_scales.len(),
                self.group_boundaries.len()
            )));
        }
        for w in self.group_boundaries.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidConfig(
                    "group boundaries must be strictly increasing".into(),
                ));
            }
        }
        if *self.group_boundaries.last().unwrap() >= n_moments {
            return Err(Error::InvalidConfig(format!(
                "group boundary {} out of range for {} moments",
                self.group_boundaries.last().unwrap(),
                n_moments
            )));
        }
        for &s in &self.per_group_scales {
            if s == 0 || s % 2 == 0 {
                return Err(Error::InvalidFoldScale(s));
            }
        }
        Ok(())
    }
}
