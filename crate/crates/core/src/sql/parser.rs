use super::ast::{AstNode, NodeKind, SqlAst};
use super::lexer::{tokenize, Tok, Token};
use super::SqlError;

/// Parses one statement of the supported SELECT subset.
pub fn parse_sql(text: &str) -> Result<SqlAst, SqlError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    if let Some(Tok::Word(w)) = parser.peek() {
        let upper = w.to_ascii_uppercase();
        if STATEMENT_WORDS.contains(&upper.as_str()) {
            return Err(SqlError::Unsupported {
                offset: parser.offset(),
                construct: format!("{upper} statement"),
            });
        }
    }
    let root = parser.compound()?;
    while parser.eat_symbol(";") {}
    if parser.peek().is_some() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(SqlAst::new(root))
}

const STATEMENT_WORDS: &[&str] = &[
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "ALTER", "WITH", "PRAGMA", "REPLACE", "VALUES",
    "ATTACH", "BEGIN", "COMMIT",
];

const RESERVED: &[&str] = &[
    "SELECT",
    "FROM",
    "WHERE",
    "GROUP",
    "BY",
    "HAVING",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "UNION",
    "INTERSECT",
    "EXCEPT",
    "JOIN",
    "INNER",
    "LEFT",
    "RIGHT",
    "FULL",
    "OUTER",
    "CROSS",
    "NATURAL",
    "ON",
    "AS",
    "AND",
    "OR",
    "NOT",
    "IN",
    "LIKE",
    "BETWEEN",
    "IS",
    "NULL",
    "EXISTS",
    "DISTINCT",
    "ALL",
    "ASC",
    "DESC",
    "CASE",
    "WHEN",
    "THEN",
    "ELSE",
    "END",
    "CAST",
    "USING",
    "GLOB",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + ahead).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn error(&self, message: &str) -> SqlError {
        let found = match self.peek() {
            Some(Tok::Word(w)) | Some(Tok::Quoted(w)) | Some(Tok::Number(w)) => w.clone(),
            Some(Tok::Str(s)) => format!("'{s}'"),
            Some(Tok::Symbol(s)) => (*s).to_string(),
            None => "end of input".to_string(),
        };
        SqlError::Parse {
            offset: self.offset(),
            message: format!("{message}, found {found}"),
        }
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn is_word_at(&self, ahead: usize, kw: &str) -> bool {
        matches!(self.peek_at(ahead), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.is_word(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {kw}")))
        }
    }

    fn is_symbol(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Tok::Symbol(s)) if *s == sym)
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if self.is_symbol(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> Result<(), SqlError> {
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{sym}'")))
        }
    }

    fn unsupported(&self, construct: &str) -> SqlError {
        SqlError::Unsupported {
            offset: self.offset(),
            construct: construct.to_string(),
        }
    }

    fn compound(&mut self) -> Result<AstNode, SqlError> {
        let mut left = self.compound_operand()?;
        loop {
            let op = if self.eat_word("UNION") {
                if self.eat_word("ALL") {
                    "union all"
                } else {
                    "union"
                }
            } else if self.eat_word("INTERSECT") {
                "intersect"
            } else if self.eat_word("EXCEPT") {
                "except"
            } else {
                break;
            };
            let right = self.compound_operand()?;
            left = AstNode::labeled(NodeKind::SetOp, op, vec![left, right]);
        }
        Ok(left)
    }

    fn compound_operand(&mut self) -> Result<AstNode, SqlError> {
        if self.is_symbol("(") && self.is_word_at(1, "SELECT") {
            self.pos += 1;
            let inner = self.compound()?;
            self.expect_symbol(")")?;
            return Ok(AstNode::inner(NodeKind::Subquery, vec![inner]));
        }
        self.select_core()
    }

    fn select_core(&mut self) -> Result<AstNode, SqlError> {
        self.expect_word("SELECT")?;
        let mut select = AstNode::inner(NodeKind::Select, Vec::new());
        if self.eat_word("DISTINCT") {
            select.text = "distinct".into();
        } else {
            self.eat_word("ALL");
        }
        loop {
            select.children.push(self.projection()?);
            if !self.eat_symbol(",") {
                break;
            }
        }
        if self.eat_word("FROM") {
            select.children.push(self.parse_from_clause()?);
        }
        if self.eat_word("WHERE") {
            let cond = self.expr()?;
            select
                .children
                .push(AstNode::inner(NodeKind::Where, vec![cond]));
        }
        if self.is_word("GROUP") {
            self.pos += 1;
            self.expect_word("BY")?;
            let items = self.expr_list()?;
            select
                .children
                .push(AstNode::inner(NodeKind::GroupBy, items));
        }
        if self.eat_word("HAVING") {
            let cond = self.expr()?;
            select
                .children
                .push(AstNode::inner(NodeKind::Having, vec![cond]));
        }
        if self.is_word("ORDER") {
            self.pos += 1;
            self.expect_word("BY")?;
            let mut items = Vec::new();
            loop {
                let e = self.expr()?;
                let dir = if self.eat_word("DESC") {
                    "desc"
                } else {
                    self.eat_word("ASC");
                    "asc"
                };
                items.push(AstNode::labeled(NodeKind::Operator, dir, vec![e]));
                if !self.eat_symbol(",") {
                    break;
                }
            }
            select
                .children
                .push(AstNode::inner(NodeKind::OrderBy, items));
        }
        if self.eat_word("LIMIT") {
            let mut items = vec![self.expr()?];
            if self.eat_word("OFFSET") || self.eat_symbol(",") {
                items.push(self.expr()?);
            }
            select.children.push(AstNode::inner(NodeKind::Limit, items));
        }
        Ok(select)
    }

    fn projection(&mut self) -> Result<AstNode, SqlError> {
        if self.eat_symbol("*") {
            return Ok(AstNode::leaf(NodeKind::Star, "*"));
        }
        let e = self.expr()?;
        self.maybe_alias(e)
    }

    fn maybe_alias(&mut self, node: AstNode) -> Result<AstNode, SqlError> {
        let explicit = self.eat_word("AS");
        let name = match self.peek() {
            Some(Tok::Word(w)) if !is_reserved(w) => Some(w.clone()),
            Some(Tok::Quoted(w)) => Some(w.clone()),
            Some(Tok::Str(s)) if explicit => Some(s.clone()),
            _ => None,
        };
        match name {
            Some(name) => {
                self.pos += 1;
                Ok(AstNode::labeled(NodeKind::Alias, name, vec![node]))
            }
            None if explicit => Err(self.error("expected alias name")),
            None => Ok(node),
        }
    }

    fn parse_from_clause(&mut self) -> Result<AstNode, SqlError> {
        let mut from = AstNode::inner(NodeKind::From, vec![self.table_source()?]);
        loop {
            let flavour = if self.eat_symbol(",") {
                ",".to_string()
            } else if let Some(f) = self.join_flavour()? {
                f
            } else {
                break;
            };
            let source = self.table_source()?;
            let mut join = AstNode::labeled(NodeKind::Join, flavour.clone(), vec![source]);
            if flavour != "," && self.eat_word("ON") {
                let cond = self.expr()?;
                join.children.push(AstNode::inner(NodeKind::On, vec![cond]));
            } else if self.is_word("USING") {
                return Err(self.unsupported("JOIN ... USING"));
            }
            from.children.push(join);
        }
        Ok(from)
    }

    fn join_flavour(&mut self) -> Result<Option<String>, SqlError> {
        let start = self.pos;
        let mut words = Vec::new();
        if self.is_word("NATURAL") {
            return Err(self.unsupported("NATURAL JOIN"));
        }
        for kw in ["LEFT", "RIGHT", "FULL", "INNER", "CROSS"] {
            if self.eat_word(kw) {
                words.push(kw.to_ascii_lowercase());
                if kw != "INNER" && kw != "CROSS" && self.eat_word("OUTER") {
                    words.push("outer".into());
                }
                break;
            }
        }
        if self.eat_word("JOIN") {
            words.push("join".into());
            Ok(Some(words.join(" ")))
        } else if words.is_empty() {
            Ok(None)
        } else {
            self.pos = start;
            Err(self.error("expected JOIN"))
        }
    }

    fn table_source(&mut self) -> Result<AstNode, SqlError> {
        let node = if self.eat_symbol("(") {
            if !self.is_word("SELECT") && !self.is_symbol("(") {
                return Err(self.error("expected subquery"));
            }
            let inner = self.compound()?;
            self.expect_symbol(")")?;
            AstNode::inner(NodeKind::Subquery, vec![inner])
        } else {
            let name = self.identifier()?;
            AstNode::leaf(NodeKind::IdentifierTable, name)
        };
        self.maybe_alias(node)
    }

    fn identifier(&mut self) -> Result<String, SqlError> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !is_reserved(&w) => {
                self.pos += 1;
                Ok(w)
            }
            Some(Tok::Quoted(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<AstNode>, SqlError> {
        let mut items = vec![self.expr()?];
        while self.eat_symbol(",") {
            items.push(self.expr()?);
        }
        Ok(items)
    }

    fn expr(&mut self) -> Result<AstNode, SqlError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<AstNode, SqlError> {
        let mut left = self.and_expr()?;
        while self.eat_word("OR") {
            let right = self.and_expr()?;
            left = AstNode::labeled(NodeKind::Operator, "or", vec![left, right]);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<AstNode, SqlError> {
        let mut left = self.not_expr()?;
        while self.eat_word("AND") {
            let right = self.not_expr()?;
            left = AstNode::labeled(NodeKind::Operator, "and", vec![left, right]);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<AstNode, SqlError> {
        if self.is_word("NOT") && !self.is_word_at(1, "EXISTS") {
            self.pos += 1;
            let inner = self.not_expr()?;
            return Ok(AstNode::labeled(NodeKind::Operator, "not", vec![inner]));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<AstNode, SqlError> {
        let left = self.additive()?;
        for op in ["=", "==", "!=", "<>", "<=", ">=", "<", ">"] {
            if self.eat_symbol(op) {
                let right = self.additive()?;
                let op = match op {
                    "==" => "=",
                    "<>" => "!=",
                    other => other,
                };
                return Ok(AstNode::labeled(NodeKind::Operator, op, vec![left, right]));
            }
        }
        let negated = self.is_word("NOT")
            && ["BETWEEN", "IN", "LIKE", "GLOB"]
                .iter()
                .any(|kw| self.is_word_at(1, kw));
        if negated {
            self.pos += 1;
        }
        let prefix = if negated { "not " } else { "" };
        if self.eat_word("BETWEEN") {
            let low = self.additive()?;
            self.expect_word("AND")?;
            let high = self.additive()?;
            return Ok(AstNode::labeled(
                NodeKind::Operator,
                format!("{prefix}between"),
                vec![left, low, high],
            ));
        }
        if self.eat_word("IN") {
            self.expect_symbol("(")?;
            let mut children = vec![left];
            if self.is_word("SELECT") || (self.is_symbol("(") && self.is_word_at(1, "SELECT")) {
                let inner = self.compound()?;
                children.push(AstNode::inner(NodeKind::Subquery, vec![inner]));
            } else {
                children.extend(self.expr_list()?);
            }
            self.expect_symbol(")")?;
            return Ok(AstNode::labeled(
                NodeKind::Operator,
                format!("{prefix}in"),
                children,
            ));
        }
        for kw in ["LIKE", "GLOB"] {
            if self.eat_word(kw) {
                let pattern = self.additive()?;
                return Ok(AstNode::labeled(
                    NodeKind::Operator,
                    format!("{prefix}{}", kw.to_ascii_lowercase()),
                    vec![left, pattern],
                ));
            }
        }
        if negated {
            return Err(self.error("expected BETWEEN, IN or LIKE"));
        }
        if self.eat_word("IS") {
            let op = if self.eat_word("NOT") { "is not" } else { "is" };
            let right = self.additive()?;
            return Ok(AstNode::labeled(NodeKind::Operator, op, vec![left, right]));
        }
        Ok(left)
    }

    fn additive(&mut self) -> Result<AstNode, SqlError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = ["+", "-", "||"].into_iter().find(|op| self.is_symbol(op));
            let Some(op) = op else { break };
            self.pos += 1;
            let right = self.multiplicative()?;
            left = AstNode::labeled(NodeKind::Operator, op, vec![left, right]);
        }
        Ok(left)
    }

    fn multiplicative(&mut self) -> Result<AstNode, SqlError> {
        let mut left = self.unary()?;
        loop {
            let op = ["*", "/", "%"].into_iter().find(|op| self.is_symbol(op));
            let Some(op) = op else { break };
            self.pos += 1;
            let right = self.unary()?;
            left = AstNode::labeled(NodeKind::Operator, op, vec![left, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<AstNode, SqlError> {
        if self.eat_symbol("-") {
            if let Some(Tok::Number(n)) = self.peek().cloned() {
                self.pos += 1;
                return Ok(AstNode::leaf(NodeKind::Literal, format!("-{n}")));
            }
            let inner = self.unary()?;
            return Ok(AstNode::labeled(NodeKind::Operator, "-", vec![inner]));
        }
        if self.eat_symbol("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<AstNode, SqlError> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(AstNode::leaf(NodeKind::Literal, n))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(AstNode::leaf(NodeKind::Literal, quote_string(&s)))
            }
            Some(Tok::Symbol("(")) => {
                self.pos += 1;
                if self.is_word("SELECT") || (self.is_symbol("(") && self.is_word_at(1, "SELECT")) {
                    let inner = self.compound()?;
                    self.expect_symbol(")")?;
                    return Ok(AstNode::inner(NodeKind::Subquery, vec![inner]));
                }
                let inner = self.expr()?;
                self.expect_symbol(")")?;
                Ok(inner)
            }
            Some(Tok::Symbol("*")) => {
                self.pos += 1;
                Ok(AstNode::leaf(NodeKind::Star, "*"))
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("NULL") => {
                self.pos += 1;
                Ok(AstNode::leaf(NodeKind::Literal, "null"))
            }
            Some(Tok::Word(w))
                if w.eq_ignore_ascii_case("EXISTS") || w.eq_ignore_ascii_case("NOT") =>
            {
                let op = if self.eat_word("NOT") {
                    "not exists"
                } else {
                    "exists"
                };
                self.expect_word("EXISTS")?;
                self.expect_symbol("(")?;
                let inner = self.compound()?;
                self.expect_symbol(")")?;
                Ok(AstNode::labeled(
                    NodeKind::Operator,
                    op,
                    vec![AstNode::inner(NodeKind::Subquery, vec![inner])],
                ))
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("CASE") => {
                Err(self.unsupported("CASE expression"))
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("CAST") => {
                Err(self.unsupported("CAST expression"))
            }
            Some(Tok::Word(w))
                if self.peek_at(1) == Some(&Tok::Symbol("(")) && !is_reserved(&w) =>
            {
                self.pos += 2;
                self.function(w)
            }
            Some(Tok::Word(_)) | Some(Tok::Quoted(_)) => self.column_ref(),
            _ => Err(self.error("expected expression")),
        }
    }

    fn function(&mut self, name: String) -> Result<AstNode, SqlError> {
        let mut node = AstNode::labeled(NodeKind::Function, name.to_ascii_lowercase(), Vec::new());
        if self.eat_symbol(")") {
            return Ok(node);
        }
        if self.eat_word("DISTINCT") {
            let arg = self.expr()?;
            node.children
                .push(AstNode::labeled(NodeKind::Operator, "distinct", vec![arg]));
        } else {
            node.children.push(self.expr()?);
        }
        while self.eat_symbol(",") {
            node.children.push(self.expr()?);
        }
        self.expect_symbol(")")?;
        Ok(node)
    }

    fn column_ref(&mut self) -> Result<AstNode, SqlError> {
        let first = self.identifier()?;
        if self.eat_symbol(".") {
            if self.eat_symbol("*") {
                return Ok(AstNode::leaf(NodeKind::Star, format!("{first}.*")));
            }
            let column = self.identifier()?;
            return Ok(AstNode::leaf(
                NodeKind::IdentifierColumn,
                format!("{first}.{column}"),
            ));
        }
        Ok(AstNode::leaf(NodeKind::IdentifierColumn, first))
    }
}

fn quote_string(content: &str) -> String {
    format!("'{}'", content.replace('\'', "''"))
}
