use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagKind {
    Syntax,
    Scope,
    DuplicateTarget,
    Shadowing,
    Arity,
    Type,
    Lint,
}

impl DiagKind {
    fn label(self) -> &'static str {
        match self {
            DiagKind::Syntax => "syntax error",
            DiagKind::Scope => "scope error",
            DiagKind::DuplicateTarget => "duplicate target",
            DiagKind::Shadowing => "shadowing error",
            DiagKind::Arity => "arity error",
            DiagKind::Type => "type error",
            DiagKind::Lint => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { kind, span, message: message.into() }
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        Self::new(DiagKind::Syntax, span, message)
    }

    pub fn is_error(&self) -> bool {
        self.kind != DiagKind::Lint
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.span.line, self.span.col, self.kind.label(), self.message)
    }
}
