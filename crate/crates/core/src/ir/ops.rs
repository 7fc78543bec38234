//! Per-step functions of the combinational basic blocks.

use super::BasicOp;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("no CHOICE condition is satisfied")]
    ChoiceUnsatisfied,
    #[error("operand has the wrong sort")]
    Sort,
    #[error("DELAY has no single-step function")]
    Delay,
}

impl BasicOp {
    /// Evaluates the block function on already-inverted inputs.
    ///
    /// DELAY is stateful and handled by the simulator.
    pub fn apply(self, inputs: &[Value]) -> Result<Value, OpError> {
        let b = |v: Value| v.as_bool().ok_or(OpError::Sort);
        let i = |v: Value| v.as_int().ok_or(OpError::Sort);
        let pair = || -> Result<(i64, i64), OpError> {
            match inputs {
                [x, y] => Ok((i(*x)?, i(*y)?)),
                _ => Err(OpError::Sort),
            }
        };
        Ok(match self {
            BasicOp::And => {
                let mut acc = true;
                for v in inputs {
                    acc &= b(*v)?;
                }
                Value::Bool(acc)
            }
            BasicOp::Or => {
                let mut acc = false;
                for v in inputs {
                    acc |= b(*v)?;
                }
                Value::Bool(acc)
            }
            BasicOp::Iff => match inputs {
                [x, y] => Value::Bool(b(*x)? == b(*y)?),
                _ => return Err(OpError::Sort),
            },
            BasicOp::Add => {
                let (x, y) = pair()?;
                Value::Int(x.checked_add(y).ok_or(OpError::Overflow)?)
            }
            BasicOp::Sub => {
                let (x, y) = pair()?;
                Value::Int(x.checked_sub(y).ok_or(OpError::Overflow)?)
            }
            BasicOp::Mul => {
                let (x, y) = pair()?;
                Value::Int(x.checked_mul(y).ok_or(OpError::Overflow)?)
            }
            BasicOp::Div => {
                let (x, y) = pair()?;
                if y == 0 {
                    return Err(OpError::DivisionByZero);
                }
                Value::Int(x.checked_div(y).ok_or(OpError::Overflow)?)
            }
            BasicOp::Gt => {
                let (x, y) = pair()?;
                Value::Bool(x > y)
            }
            BasicOp::Lt => {
                let (x, y) = pair()?;
                Value::Bool(x < y)
            }
            BasicOp::Le => {
                let (x, y) = pair()?;
                Value::Bool(x <= y)
            }
            BasicOp::Ge => {
                let (x, y) = pair()?;
                Value::Bool(x >= y)
            }
            BasicOp::Eq => match inputs {
                [x, y] if x.is_bool() == y.is_bool() => Value::Bool(x == y),
                _ => return Err(OpError::Sort),
            },
            BasicOp::Count => {
                let mut n = 0i64;
                for v in inputs {
                    n += b(*v)? as i64;
                }
                Value::Int(n)
            }
            BasicOp::Assign => match inputs {
                [x] => *x,
                _ => return Err(OpError::Sort),
            },
            BasicOp::Choice => {
                for pair in inputs.chunks(2) {
                    if let [c, r] = pair {
                        if b(*c)? {
                            return Ok(*r);
                        }
                    }
                }
                return Err(OpError::ChoiceUnsatisfied);
            }
            BasicOp::Delay => return Err(OpError::Delay),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bools(bs: &[u8]) -> Vec<Value> {
        bs.iter().map(|b| Value::Bool(*b != 0)).collect()
    }

    #[test]
    fn count_counts_true_inputs() {
        assert_eq!(BasicOp::Count.apply(&bools(&[1, 0, 1, 1, 0])), Ok(Value::Int(3)));
    }

    #[test]
    fn div_truncates_and_rejects_zero() {
        let v = |a, b| vec![Value::Int(a), Value::Int(b)];
        assert_eq!(BasicOp::Div.apply(&v(-7, 2)), Ok(Value::Int(-3)));
        assert_eq!(BasicOp::Div.apply(&v(7, 0)), Err(OpError::DivisionByZero));
        assert_eq!(BasicOp::Add.apply(&v(i64::MAX, 1)), Err(OpError::Overflow));
    }

    #[test]
    fn choice_takes_first_satisfied() {
        let ins = vec![
            Value::Bool(false),
            Value::Int(1),
            Value::Bool(true),
            Value::Int(2),
            Value::Bool(true),
            Value::Int(3),
        ];
        assert_eq!(BasicOp::Choice.apply(&ins), Ok(Value::Int(2)));
        assert_eq!(
            BasicOp::Choice.apply(&ins[..2]),
            Err(OpError::ChoiceUnsatisfied)
        );
    }

    #[test]
    fn and_or_nary() {
        assert_eq!(BasicOp::And.apply(&bools(&[1, 1, 0])), Ok(Value::Bool(false)));
        assert_eq!(BasicOp::Or.apply(&bools(&[0, 0, 1])), Ok(Value::Bool(true)));
        assert_eq!(BasicOp::Iff.apply(&bools(&[0, 0])), Ok(Value::Bool(true)));
    }
}
