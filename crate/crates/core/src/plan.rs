//! Addition plans: the order in which a scheme's block sums are formed.
//!
//! Stage 1 builds every left and right product factor from the input
//! blocks, stage 2 builds every output from products and recursive calls.
//! Nodes may reuse earlier nodes, which is how common sub-expressions save
//! additions. A node with t terms costs t − 1 block additions; a node with a
//! single (possibly negated) term is free.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{indexed, parse_signed_sum};
use crate::scheme::{rxtx_scheme, Algebra, BilinearScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    /// Input block, zero-based (X₁ is 0).
    Input(usize),
    /// Earlier node of the same stage.
    Node(usize),
    /// General product mₖ (stage 2 only).
    Product(usize),
    /// Recursive call sₖ (stage 2 only).
    Call(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumNode {
    pub name: String,
    pub terms: Vec<(i64, Operand)>,
}

impl SumNode {
    pub fn additions(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanKind {
    /// Every factor and output summed term by term from the coefficients
    /// (139 block additions for RXTX).
    Direct,
    /// Shared sub-expressions (100 block additions for RXTX).
    #[default]
    Optimized,
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::Direct => "direct",
            PlanKind::Optimized => "optimized",
        })
    }
}

impl std::str::FromStr for PlanKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "naive" | "naive139" => Ok(PlanKind::Direct),
            "optimized" | "optimized100" => Ok(PlanKind::Optimized),
            _ => Err(Error::InvalidArgument(format!("unknown plan `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditionPlan {
    pub grid: usize,
    pub stage1: Vec<SumNode>,
    /// Stage-1 node holding the left factor of each product.
    pub left: Vec<usize>,
    /// Stage-1 node holding the right factor of each product.
    pub right: Vec<usize>,
    /// Zero-based block index of each recursive call.
    pub calls: Vec<usize>,
    pub stage2: Vec<SumNode>,
    /// Stage-2 node holding each upper-triangle output, row-major.
    pub outputs: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditionCount {
    pub stage1: usize,
    pub stage2: usize,
}

impl AdditionCount {
    pub fn total(&self) -> usize {
        self.stage1 + self.stage2
    }
}

fn signed_terms(coeffs: impl Iterator<Item = (usize, i64)>, op: fn(usize) -> Operand) -> Result<Vec<(i64, Operand)>> {
    let mut terms = Vec::new();
    for (i, c) in coeffs {
        match c {
            0 => {}
            1 | -1 => terms.push((c, op(i))),
            _ => return Err(Error::MalformedScheme(format!("coefficient {c} is not a unit"))),
        }
    }
    Ok(terms)
}

impl AdditionPlan {
    /// Term-by-term plan read straight off the scheme's coefficients. The
    /// scheme must be a block scheme with coefficients in {−1, 0, 1}.
    pub fn direct(scheme: &BilinearScheme) -> Result<Self> {
        scheme.validate()?;
        if scheme.algebra != Algebra::Block {
            return Err(Error::MalformedScheme("only block schemes can be executed".into()));
        }
        let mut stage1 = Vec::new();
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (k, p) in scheme.products.iter().enumerate() {
            left.push(stage1.len());
            stage1.push(SumNode {
                name: format!("L{}", k + 1),
                terms: signed_terms(p.left.iter().copied().enumerate(), Operand::Input)?,
            });
            right.push(stage1.len());
            stage1.push(SumNode {
                name: format!("R{}", k + 1),
                terms: signed_terms(p.right.iter().copied().enumerate(), Operand::Input)?,
            });
        }
        let as_unit = |r: &num_rational::Rational64| -> Result<i64> {
            if !r.is_integer() {
                return Err(Error::MalformedScheme(format!("coefficient {r} is not a unit")));
            }
            r.to_integer().to_i64().ok_or_else(|| Error::MalformedScheme("coefficient overflow".into()))
        };
        let mut stage2 = Vec::new();
        let mut outputs = Vec::new();
        for o in &scheme.outputs {
            let prods = o.products.iter().map(as_unit).collect::<Result<Vec<_>>>()?;
            let calls = o.calls.iter().map(as_unit).collect::<Result<Vec<_>>>()?;
            let mut terms = signed_terms(prods.into_iter().enumerate(), Operand::Product)?;
            terms.extend(signed_terms(calls.into_iter().enumerate(), Operand::Call)?);
            outputs.push((o.row, o.col, stage2.len()));
            stage2.push(SumNode { name: format!("C{}{}", o.row + 1, o.col + 1), terms });
        }
        Ok(Self { grid: scheme.grid, stage1, left, right, calls: scheme.calls.clone(), stage2, outputs })
    }

    /// Builds a plan from assignment lines such as `w3 = X6 + X7` (stage 1)
    /// and `C13 = z2 + z3 + m15 + m16` (stage 2). Factors must be named
    /// `L1…`/`R1…`; outputs `C11…`.
    pub fn from_assignments(
        grid: usize,
        num_products: usize,
        calls: Vec<usize>,
        stage1: &[&str],
        stage2: &[&str],
    ) -> Result<Self> {
        fn build(
            lines: &[&str],
            resolve: &dyn Fn(&str) -> Option<Operand>,
        ) -> Result<Vec<SumNode>> {
            let mut nodes: Vec<SumNode> = Vec::new();
            for line in lines {
                let (name, expr) = line
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("expected `name = expr` in `{line}`")))?;
                let name = name.trim().to_string();
                let mut terms = Vec::new();
                for (sign, t) in parse_signed_sum(expr)? {
                    let op = match nodes.iter().position(|n| n.name == t) {
                        Some(i) => Operand::Node(i),
                        None => resolve(&t).ok_or_else(|| Error::InvalidArgument(format!("unknown term `{t}`")))?,
                    };
                    terms.push((sign, op));
                }
                if nodes.iter().any(|n| n.name == name) {
                    return Err(Error::InvalidArgument(format!("`{name}` assigned twice")));
                }
                nodes.push(SumNode { name, terms });
            }
            Ok(nodes)
        }

        let nb = grid * grid;
        let ncalls = calls.len();
        let s1 = build(stage1, &|t| indexed(t, "X").filter(|&i| i < nb).map(Operand::Input))?;
        let s2 = build(stage2, &|t| {
            indexed(t, "m")
                .filter(|&i| i < num_products)
                .map(Operand::Product)
                .or_else(|| indexed(t, "s").filter(|&i| i < ncalls).map(Operand::Call))
        })?;
        let find = |nodes: &[SumNode], name: String| -> Result<usize> {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| Error::InvalidArgument(format!("plan does not define `{name}`")))
        };
        let left = (1..=num_products).map(|k| find(&s1, format!("L{k}"))).collect::<Result<_>>()?;
        let right = (1..=num_products).map(|k| find(&s1, format!("R{k}"))).collect::<Result<_>>()?;
        let mut outputs = Vec::new();
        for i in 0..grid {
            for j in i..grid {
                outputs.push((i, j, find(&s2, format!("C{}{}", i + 1, j + 1))?));
            }
        }
        Ok(Self { grid, stage1: s1, left, right, calls, stage2: s2, outputs })
    }

    pub fn addition_count(&self) -> AdditionCount {
        AdditionCount {
            stage1: self.stage1.iter().map(SumNode::additions).sum(),
            stage2: self.stage2.iter().map(SumNode::additions).sum(),
        }
    }

    pub fn num_products(&self) -> usize {
        self.left.len()
    }

    /// Symbolic value of every stage-1 node as a coefficient vector over the
    /// input blocks.
    pub fn symbolic_stage1(&self) -> Vec<Vec<i64>> {
        let nb = self.grid * self.grid;
        let mut vals: Vec<Vec<i64>> = Vec::with_capacity(self.stage1.len());
        for node in &self.stage1 {
            let mut v = vec![0i64; nb];
            for &(c, op) in &node.terms {
                match op {
                    Operand::Input(i) => v[i] += c,
                    Operand::Node(i) => v.iter_mut().zip(&vals[i]).for_each(|(a, b)| *a += c * b),
                    _ => unreachable!("stage 1 reads inputs and stage-1 nodes only"),
                }
            }
            vals.push(v);
        }
        vals
    }

    /// Symbolic value of every stage-2 node over (products ++ calls).
    pub fn symbolic_stage2(&self) -> Vec<Vec<i64>> {
        let np = self.num_products();
        let width = np + self.calls.len();
        let mut vals: Vec<Vec<i64>> = Vec::with_capacity(self.stage2.len());
        for node in &self.stage2 {
            let mut v = vec![0i64; width];
            for &(c, op) in &node.terms {
                match op {
                    Operand::Product(k) => v[k] += c,
                    Operand::Call(k) => v[np + k] += c,
                    Operand::Node(i) => v.iter_mut().zip(&vals[i]).for_each(|(a, b)| *a += c * b),
                    Operand::Input(_) => unreachable!("stage 2 never reads input blocks"),
                }
            }
            vals.push(v);
        }
        vals
    }

    /// Checks that evaluating the plan symbolically reproduces exactly the
    /// factors and output combinations of `scheme`. Returns a description
    /// of the first mismatch.
    pub fn check_against(&self, scheme: &BilinearScheme) -> std::result::Result<(), String> {
        if self.grid != scheme.grid || self.num_products() != scheme.products.len() || self.calls != scheme.calls {
            return Err("plan and scheme disagree on shape".into());
        }
        let s1 = self.symbolic_stage1();
        for (k, p) in scheme.products.iter().enumerate() {
            if s1[self.left[k]] != p.left {
                return Err(format!("left factor of m{} differs", k + 1));
            }
            if s1[self.right[k]] != p.right {
                return Err(format!("right factor of m{} differs", k + 1));
            }
        }
        let s2 = self.symbolic_stage2();
        for (&(row, col, node), o) in self.outputs.iter().zip(&scheme.outputs) {
            if (row, col) != (o.row, o.col) {
                return Err("output order differs".into());
            }
            let want: Vec<_> = o.products.iter().chain(&o.calls).collect();
            let ok = s2[node].len() == want.len()
                && s2[node].iter().zip(&want).all(|(&a, b)| b.is_integer() && (b.to_integer() - a).is_zero());
            if !ok {
                return Err(format!("C{}{} differs", row + 1, col + 1));
            }
        }
        Ok(())
    }
}

const RXTX_STAGE1: [&str; 65] = [
    "y1 = X13 - X14",
    "y2 = X12 - X10",
    "w1 = X2 + X4 - X8",
    "w2 = X1 - X5 - X6",
    "w3 = X6 + X7",
    "w4 = X14 + X15",
    "w5 = y2 + X16",
    "w6 = X10 + X11",
    "w7 = X9 + y1",
    "w8 = X9 - X8",
    "w9 = X7 - X11",
    "w10 = X6 - X7",
    "w11 = X2 - X3",
    "L1 = -w1 + X3",
    "R1 = X8 + X11",
    "L2 = w2 + X7",
    "R2 = X15 + X5",
    "L3 = -X2 + X12",
    "R3 = w5",
    "L4 = X9 - X6",
    "R4 = w7",
    "L5 = X2 + X11",
    "R5 = X15 - w3",
    "L6 = X6 + X11",
    "R6 = w3 - X11",
    "L7 = X11",
    "R7 = w3",
    "L8 = X2",
    "R8 = w3 - w4 + w5",
    "L9 = X6",
    "R9 = w7 - w6 + w3",
    "L10 = w1 - X3 + X7 + X11",
    "R10 = X11",
    "L11 = X5 + w10",
    "R11 = X5",
    "L12 = w11 + X4",
    "R12 = X8",
    "L13 = -w2 + X3 - w9",
    "R13 = X15",
    "L14 = -w2",
    "R14 = w7 + w4",
    "L15 = w1",
    "R15 = w6 + w5",
    "L16 = X1 - X8",
    "R16 = X9 - X16",
    "L17 = X12",
    "R17 = -y2",
    "L18 = X9",
    "R18 = y1",
    "L19 = -w11",
    "R19 = -X15 + X7 + X8",
    "L20 = X5 + w8",
    "R20 = X9",
    "L21 = X8",
    "R21 = X12 + w8",
    "L22 = -w10",
    "R22 = X5 + w9",
    "L23 = X1",
    "R23 = X13 - X5 + X16",
    "L24 = -X1 + X4 + X12",
    "R24 = X16",
    "L25 = X9 + X2 + X10",
    "R25 = X14",
    "L26 = X6 + X10 + X12",
    "R26 = X10",
];

const RXTX_STAGE2: [&str; 18] = [
    "z1 = m7 - m11 - m12",
    "z2 = m1 + m12 + m21",
    "z3 = m3 + m17 - m24",
    "z4 = m2 + m11 + m23",
    "z5 = m5 + m7 + m8",
    "z6 = m4 - m18 - m20",
    "z7 = m6 - m7 - m9",
    "z8 = m17 + m18",
    "C11 = s1 + s2 + s3 + s4",
    "C12 = m2 - m5 - z1 + m13 + m19",
    "C13 = z2 + z3 + m15 + m16",
    "C14 = z4 - z3 - z5 + m13",
    "C22 = m1 + m6 - z1 + m10 + m22",
    "C23 = z2 - z6 + z7 + m10",
    "C24 = z4 + z6 + m14 + m16",
    "C33 = m4 - z7 - z8 + m26",
    "C34 = m3 + z5 + z8 + m25",
    "C44 = s5 + s6 + s7 + s8",
];

/// Shared-subexpression plan for RXTX: 53 additions before the products
/// and 47 after.
pub fn rxtx_optimized_plan() -> &'static AdditionPlan {
    static PLAN: OnceLock<AdditionPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let s = rxtx_scheme();
        AdditionPlan::from_assignments(4, 26, s.calls.clone(), &RXTX_STAGE1, &RXTX_STAGE2)
            .expect("built-in RXTX plan is well formed")
    })
}

pub fn rxtx_direct_plan() -> &'static AdditionPlan {
    static PLAN: OnceLock<AdditionPlan> = OnceLock::new();
    PLAN.get_or_init(|| AdditionPlan::direct(rxtx_scheme()).expect("RXTX has unit coefficients"))
}

/// Plan of the requested kind for `scheme`. Only RXTX has a hand-optimized
/// plan; other schemes use the direct plan for either kind.
pub fn plan_for(scheme: &BilinearScheme, kind: PlanKind) -> Result<AdditionPlan> {
    if scheme == rxtx_scheme() {
        return Ok(match kind {
            PlanKind::Direct => rxtx_direct_plan().clone(),
            PlanKind::Optimized => rxtx_optimized_plan().clone(),
        });
    }
    AdditionPlan::direct(scheme)
}

/// Structural (stage 1, stage 2) block-addition counts of `scheme` under
/// the given plan kind.
pub fn count_scheme_additions(scheme: &BilinearScheme, kind: PlanKind) -> Result<AdditionCount> {
    Ok(plan_for(scheme, kind)?.addition_count())
}
