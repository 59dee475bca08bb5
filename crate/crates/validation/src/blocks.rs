//! Random logical blocks over integer inputs, as Chips source and as an
//! evaluable expression tree.

use proptest::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Input(usize),
    Acc,
    Const(i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn render(&self) -> String {
        match self {
            Expr::Input(i) => format!("x{i}"),
            Expr::Acc => "acc".into(),
            Expr::Const(c) if *c < 0 => format!("(0 - {})", -c),
            Expr::Const(c) => c.to_string(),
            Expr::Add(a, b) => format!("({} + {})", a.render(), b.render()),
            Expr::Sub(a, b) => format!("({} - {})", a.render(), b.render()),
            Expr::Mul(a, b) => format!("({} * {})", a.render(), b.render()),
        }
    }

    pub fn eval(&self, inputs: &[i64], acc: i64) -> Option<i64> {
        Some(match self {
            Expr::Input(i) => inputs[*i],
            Expr::Acc => acc,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(inputs, acc)?.checked_add(b.eval(inputs, acc)?)?,
            Expr::Sub(a, b) => a.eval(inputs, acc)?.checked_sub(b.eval(inputs, acc)?)?,
            Expr::Mul(a, b) => a.eval(inputs, acc)?.checked_mul(b.eval(inputs, acc)?)?,
        })
    }
}

/// A block `blk(int x0, .., int x{k-1})` with an accumulator `acc` updated
/// first and outputs `y0..` computed from the inputs and the new `acc`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub inputs: usize,
    pub acc_update: Expr,
    pub outputs: Vec<Expr>,
}

impl BlockSpec {
    pub fn source(&self) -> String {
        let params: Vec<String> = (0..self.inputs).map(|i| format!("int x{i}")).collect();
        let mut s = format!("logical blk({}) init {{\n  int acc = 0;\n", params.join(", "));
        for j in 0..self.outputs.len() {
            s.push_str(&format!("  int y{j} = 0;\n"));
        }
        s.push_str(&format!("}} then {{\n  acc = {};\n", self.acc_update.render()));
        for (j, e) in self.outputs.iter().enumerate() {
            s.push_str(&format!("  y{j} = {};\n", e.render()));
        }
        let outs: Vec<String> = (0..self.outputs.len()).map(|j| format!("y{j}")).collect();
        s.push_str(&format!("}} -> ({})\n", outs.join(", ")));
        s
    }
}

fn expr(inputs: usize, with_acc: bool) -> impl Strategy<Value = Expr> {
    let mut leaves: Vec<BoxedStrategy<Expr>> = vec![
        (0..inputs).prop_map(Expr::Input).boxed(),
        (-9i64..=9).prop_map(Expr::Const).boxed(),
    ];
    if with_acc {
        leaves.push(Just(Expr::Acc).boxed());
    }
    let leaf = proptest::strategy::Union::new(leaves);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
        ]
    })
}

/// Blocks with 1..=`max_inputs` inputs and one or two outputs. The
/// accumulator only adds a product-free term so it stays far from overflow.
pub fn block(max_inputs: usize) -> impl Strategy<Value = BlockSpec> {
    (1..=max_inputs).prop_flat_map(|k| {
        let acc = expr(k, false).prop_filter("no products in acc", |e| !has_mul(e));
        (
            Just(k),
            acc.prop_map(|e| Expr::Add(Box::new(Expr::Acc), Box::new(e))),
            proptest::collection::vec(expr(k, true), 1..=2),
        )
            .prop_map(|(inputs, acc_update, outputs)| BlockSpec {
                inputs,
                acc_update,
                outputs,
            })
    })
}

fn has_mul(e: &Expr) -> bool {
    match e {
        Expr::Mul(..) => true,
        Expr::Add(a, b) | Expr::Sub(a, b) => has_mul(a) || has_mul(b),
        _ => false,
    }
}

/// One step of an input schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Offer(usize, i64),
    Update,
    Emit,
}

pub fn schedule(inputs: usize, max_len: usize) -> impl Strategy<Value = Vec<Event>> {
    let event = prop_oneof![
        3 => (0..inputs, -50i64..=50).prop_map(|(i, v)| Event::Offer(i, v)),
        1 => Just(Event::Update),
        1 => Just(Event::Emit),
    ];
    proptest::collection::vec(event, 1..=max_len)
}

/// What a schedule step showed to the outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Accepted(bool),
    Updated(bool),
    Emitted(Option<(usize, i64)>),
}
