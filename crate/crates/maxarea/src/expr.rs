//! Closed-form generators `g(x, y)` written as expressions.
//!
//! Variables are `x`, `y` and `r = hypot(x, y)`. Besides the `math::` builtins of
//! evalexpr the short names `sin cos tan exp ln sqrt abs asinh hypot` and the constant
//! `pi` are available. Integer literals use integer arithmetic, so write `0.5 * x` or
//! `x / 2.0`, not `1 / 2 * x`.

use std::sync::Arc;

use anyhow::{anyhow, Context as _, Result};
use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables, DefaultNumericTypes, EvalexprError,
    Function, HashMapContext, Node, Value,
};

type Ctx = HashMapContext<DefaultNumericTypes>;

#[derive(Clone)]
pub struct Generator {
    source: String,
    tree: Arc<Node<DefaultNumericTypes>>,
}

impl std::fmt::Debug for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Generator").field(&self.source).finish()
    }
}

fn unary(ctx: &mut Ctx, name: &str, f: fn(f64) -> f64) {
    let func = Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?))));
    ctx.set_function(name.into(), func).expect("context accepts functions");
}

fn context(x: [f64; 2]) -> std::result::Result<Ctx, EvalexprError<DefaultNumericTypes>> {
    let mut ctx = Ctx::new();
    ctx.set_value("x".into(), Value::Float(x[0]))?;
    ctx.set_value("y".into(), Value::Float(x[1]))?;
    ctx.set_value("r".into(), Value::Float(x[0].hypot(x[1])))?;
    ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))?;
    for (name, f) in [
        ("sin", f64::sin as fn(f64) -> f64),
        ("cos", f64::cos),
        ("tan", f64::tan),
        ("exp", f64::exp),
        ("ln", f64::ln),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
        ("asinh", f64::asinh),
    ] {
        unary(&mut ctx, name, f);
    }
    let hypot = Function::new(|arg: &Value<DefaultNumericTypes>| {
        let t = arg.as_fixed_len_tuple(2)?;
        Ok(Value::Float(t[0].as_number()?.hypot(t[1].as_number()?)))
    });
    ctx.set_function("hypot".into(), hypot)?;
    Ok(ctx)
}

impl Generator {
    /// Parses `source` and checks that it evaluates to a number at the origin.
    pub fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| anyhow!("bad expression {source:?}: {e}"))?;
        let g = Generator { source: source.into(), tree: Arc::new(tree) };
        g.eval([0.0, 0.0])?;
        Ok(g)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        let ctx = context(x).map_err(|e| anyhow!("{e}"))?;
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| anyhow!("{e}"))
            .with_context(|| format!("evaluating {:?} at {x:?}", self.source))
    }

    /// The generator as a plain function for the core crate. Call [`Generator::eval`]
    /// first on a sample point; evaluation errors after parsing become NaN.
    pub fn to_fn(&self) -> impl Fn([f64; 2]) -> f64 + Send + Sync + Clone + 'static {
        let g = self.clone();
        move |x| g.eval(x).unwrap_or(f64::NAN)
    }
}
