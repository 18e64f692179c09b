//! Java syntax layer: turns a tree-sitter-java parse tree into the small
//! declaration/body model the rest of the crate works with.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser};

/// What a call is made on, as far as lexical analysis can tell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    /// `foo()`: no explicit receiver.
    Implicit,
    /// `Type.foo()`: a static call on a named type (or a static import).
    Static(String),
    /// An expression of known static type: a typed variable, `this`, `new T()`.
    Typed(String),
    /// The result of another call; resolved later through return types.
    Call {
        on: Box<Receiver>,
        method: String,
        arity: usize,
    },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub callee: String,
    pub receiver: Receiver,
    /// Set when the receiver is a bare identifier (`f.exists()`).
    pub receiver_var: Option<String>,
    pub arg_count: usize,
    /// Arguments that are bare identifiers, in order.
    pub arg_idents: Vec<String>,
    pub start: usize,
    pub end: usize,
    /// Variable the call result is assigned to, if any.
    pub bound_to: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Creation {
    pub type_name: String,
    pub start: usize,
    pub end: usize,
    pub bound_to: Option<String>,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalDecl {
    pub name: String,
    pub type_name: String,
    pub start: usize,
    /// Byte span of the initializer expression.
    pub init: Option<(usize, usize)>,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentUse {
    pub name: String,
    pub offset: usize,
}

/// Lexical facts about one method body. Offsets are byte offsets into the
/// source file, so they order events within the method.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyFacts {
    pub calls: Vec<CallSite>,
    pub creations: Vec<Creation>,
    pub locals: Vec<LocalDecl>,
    pub ident_uses: Vec<IdentUse>,
    /// Identifiers and type names appearing in the body, in source order.
    pub tokens: Vec<String>,
    /// Fields of the enclosing class (name → type) visible to this body.
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub annotations: Vec<String>,
    pub return_type: Option<String>,
    pub params: Vec<(String, String)>,
    pub is_public: bool,
    pub is_static: bool,
    pub line: usize,
    /// `None` for abstract and interface methods.
    pub body: Option<BodyFacts>,
    /// Parameter names and types, in declaration order.
    pub signature_tokens: Vec<String>,
}

impl MethodDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_void(&self) -> bool {
        self.return_type.as_deref() == Some("void")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    /// `Outer.Inner` for nested classes.
    pub display_name: String,
    pub qualified: String,
    pub is_class: bool,
    pub superclass: Option<String>,
    pub fields: BTreeMap<String, String>,
    pub methods: Vec<MethodDecl>,
    /// Every type constructed with `new` anywhere in the class.
    pub instantiated: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JavaFile {
    pub path: PathBuf,
    pub package: Option<String>,
    pub imports: Vec<String>,
    /// Statically imported member → simple name of its declaring class.
    pub static_imports: BTreeMap<String, String>,
    pub classes: Vec<ClassDecl>,
    pub has_syntax_errors: bool,
}

impl JavaFile {
    /// Simple names of the types imported by single-type imports.
    pub fn imported_types(&self) -> BTreeSet<String> {
        self.imports
            .iter()
            .filter_map(|i| i.rsplit('.').next())
            .filter(|s| *s != "*")
            .map(str::to_string)
            .collect()
    }
}

pub fn parse_java(path: PathBuf, src: &str) -> JavaFile {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("tree-sitter-java grammar is ABI compatible");
    let tree = parser
        .parse(src, None)
        .expect("parser has a language and no timeout");
    let root = tree.root_node();

    let mut file = JavaFile {
        path,
        package: None,
        imports: Vec::new(),
        static_imports: BTreeMap::new(),
        classes: Vec::new(),
        has_syntax_errors: root.has_error(),
    };

    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        match child.kind() {
            "package_declaration" => {
                if let Some(name) = child.named_child(0) {
                    file.package = Some(text(name, src).to_string());
                }
            }
            "import_declaration" => read_import(child, src, &mut file),
            _ => {}
        }
    }

    let ctx = FileCtx {
        src,
        static_imports: file.static_imports.clone(),
    };
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        if is_type_decl(child.kind()) {
            collect_class(&ctx, child, file.package.as_deref(), None, &mut file.classes);
        }
    }
    file
}

struct FileCtx<'a> {
    src: &'a str,
    static_imports: BTreeMap<String, String>,
}

fn text<'a>(node: Node, src: &'a str) -> &'a str {
    &src[node.start_byte()..node.end_byte()]
}

fn is_type_decl(kind: &str) -> bool {
    matches!(
        kind,
        "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration"
    )
}

fn read_import(node: Node, src: &str, file: &mut JavaFile) {
    let raw = text(node, src);
    let body = raw
        .trim_start_matches("import")
        .trim()
        .trim_end_matches(';')
        .trim();
    let (is_static, path) = match body.strip_prefix("static") {
        Some(rest) if rest.starts_with(char::is_whitespace) => (true, rest.trim()),
        _ => (false, body),
    };
    let path: String = path.chars().filter(|c| !c.is_whitespace()).collect();
    if is_static {
        let mut parts = path.rsplitn(3, '.');
        let member = parts.next().unwrap_or_default();
        let class = parts.next().unwrap_or_default();
        if member != "*" && !class.is_empty() {
            file.static_imports
                .insert(member.to_string(), class.to_string());
        }
    } else {
        file.imports.push(path);
    }
}

/// Simple name of a type node: generics, qualification and annotations
/// are stripped; arrays keep their brackets.
pub(crate) fn simple_type(node: Node, src: &str) -> String {
    match node.kind() {
        "generic_type" => node
            .named_child(0)
            .map(|n| simple_type(n, src))
            .unwrap_or_default(),
        "scoped_type_identifier" => {
            let mut last = None;
            let mut cursor = node.walk();
            for c in node.named_children(&mut cursor) {
                if c.kind() == "type_identifier" {
                    last = Some(c);
                }
            }
            last.map(|n| text(n, src).to_string()).unwrap_or_default()
        }
        "array_type" => {
            let elem = node
                .child_by_field_name("element")
                .map(|n| simple_type(n, src))
                .unwrap_or_default();
            format!("{elem}[]")
        }
        "annotated_type" => {
            let mut cursor = node.walk();
            let inner = node
                .named_children(&mut cursor)
                .filter(|c| !matches!(c.kind(), "marker_annotation" | "annotation"))
                .last();
            inner.map(|n| simple_type(n, src)).unwrap_or_default()
        }
        _ => text(node, src).to_string(),
    }
}

fn annotation_names(modifiers: Node, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cursor = modifiers.walk();
    for m in modifiers.named_children(&mut cursor) {
        if matches!(m.kind(), "marker_annotation" | "annotation") {
            if let Some(name) = m.child_by_field_name("name") {
                let full = text(name, src);
                out.push(full.rsplit('.').next().unwrap_or(full).to_string());
            }
        }
    }
    out
}

fn has_modifier(modifiers: Option<Node>, src: &str, word: &str) -> bool {
    let Some(m) = modifiers else { return false };
    let mut cursor = m.walk();
    let found = m
        .children(&mut cursor)
        .any(|c| !c.is_named() && text(c, src) == word);
    found
}

fn modifiers_of(node: Node) -> Option<Node> {
    let mut cursor = node.walk();
    let found = node
        .named_children(&mut cursor)
        .find(|c| c.kind() == "modifiers");
    found
}

fn collect_class(
    ctx: &FileCtx,
    node: Node,
    package: Option<&str>,
    outer: Option<&str>,
    out: &mut Vec<ClassDecl>,
) {
    let src = ctx.src;
    let name = node
        .child_by_field_name("name")
        .map(|n| text(n, src).to_string())
        .unwrap_or_default();
    let display_name = match outer {
        Some(o) => format!("{o}.{name}"),
        None => name.clone(),
    };
    let qualified = match package {
        Some(p) => format!("{p}.{display_name}"),
        None => display_name.clone(),
    };
    let superclass = node
        .child_by_field_name("superclass")
        .and_then(|s| s.named_child(0))
        .map(|t| simple_type(t, src));

    let mut class = ClassDecl {
        name,
        display_name: display_name.clone(),
        qualified,
        is_class: node.kind() == "class_declaration",
        superclass,
        fields: BTreeMap::new(),
        methods: Vec::new(),
        instantiated: BTreeSet::new(),
    };

    let Some(body) = node.child_by_field_name("body") else {
        out.push(class);
        return;
    };

    let mut members = Vec::new();
    let mut nested = Vec::new();
    let mut cursor = body.walk();
    for member in body.named_children(&mut cursor) {
        match member.kind() {
            "field_declaration" | "constant_declaration" => {
                let ty = member
                    .child_by_field_name("type")
                    .map(|t| simple_type(t, src))
                    .unwrap_or_default();
                let mut dc = member.walk();
                for decl in member.children_by_field_name("declarator", &mut dc) {
                    if let Some(n) = decl.child_by_field_name("name") {
                        class.fields.insert(text(n, src).to_string(), ty.clone());
                    }
                }
            }
            "enum_body_declarations" => {
                let mut ec = member.walk();
                members.extend(
                    member
                        .named_children(&mut ec)
                        .filter(|m| m.kind() == "method_declaration"),
                );
            }
            "method_declaration" => members.push(member),
            k if is_type_decl(k) => nested.push(member),
            _ => {}
        }
    }
    collect_instantiations(body, src, &mut class.instantiated);

    for m in members {
        class.methods.push(read_method(ctx, m, &class));
    }
    out.push(class);
    for n in nested {
        collect_class(ctx, n, package, Some(&display_name), out);
    }
}

fn collect_instantiations(node: Node, src: &str, out: &mut BTreeSet<String>) {
    if node.kind() == "object_creation_expression" {
        if let Some(t) = node.child_by_field_name("type") {
            out.insert(simple_type(t, src));
        }
    }
    let mut cursor = node.walk();
    for c in node.named_children(&mut cursor) {
        if is_type_decl(c.kind()) {
            continue;
        }
        collect_instantiations(c, src, out);
    }
}

fn read_method(ctx: &FileCtx, node: Node, class: &ClassDecl) -> MethodDecl {
    let src = ctx.src;
    let modifiers = modifiers_of(node);
    let annotations = modifiers
        .map(|m| annotation_names(m, src))
        .unwrap_or_default();
    let name = node
        .child_by_field_name("name")
        .map(|n| text(n, src).to_string())
        .unwrap_or_default();
    let return_type = node
        .child_by_field_name("type")
        .map(|t| simple_type(t, src));

    let mut params = Vec::new();
    let mut signature_tokens = Vec::new();
    if let Some(plist) = node.child_by_field_name("parameters") {
        let mut pc = plist.walk();
        for p in plist.named_children(&mut pc) {
            if !matches!(p.kind(), "formal_parameter" | "spread_parameter") {
                continue;
            }
            let ty = p
                .child_by_field_name("type")
                .or_else(|| {
                    let mut c = p.walk();
                    let t = p
                        .named_children(&mut c)
                        .find(|c| c.kind().ends_with("type") || c.kind() == "type_identifier");
                    t
                })
                .map(|t| simple_type(t, src))
                .unwrap_or_default();
            let pname = p
                .child_by_field_name("name")
                .or_else(|| {
                    let mut c = p.walk();
                    let d = p
                        .named_children(&mut c)
                        .find(|c| c.kind() == "variable_declarator")
                        .and_then(|d| d.child_by_field_name("name"));
                    d
                })
                .map(|n| text(n, src).to_string())
                .unwrap_or_default();
            signature_tokens.push(ty.trim_end_matches("[]").to_string());
            signature_tokens.push(pname.clone());
            params.push((pname, ty));
        }
    }

    let body = node.child_by_field_name("body").map(|b| {
        let mut walker = BodyWalker {
            ctx,
            class,
            facts: BodyFacts {
                fields: class.fields.clone(),
                ..BodyFacts::default()
            },
            params: params.iter().cloned().collect(),
        };
        walker.collect_locals(b);
        walker.walk(b);
        walker.facts
    });

    MethodDecl {
        name,
        annotations,
        return_type,
        params,
        is_public: has_modifier(modifiers, src, "public"),
        is_static: has_modifier(modifiers, src, "static"),
        line: node.start_position().row + 1,
        body,
        signature_tokens,
    }
}

struct BodyWalker<'a, 'c> {
    ctx: &'a FileCtx<'a>,
    class: &'c ClassDecl,
    facts: BodyFacts,
    params: BTreeMap<String, String>,
}

impl BodyWalker<'_, '_> {
    fn src(&self) -> &str {
        self.ctx.src
    }

    fn collect_locals(&mut self, node: Node) {
        let src = self.ctx.src;
        match node.kind() {
            "local_variable_declaration" => {
                let ty_node = node.child_by_field_name("type");
                let mut dc = node.walk();
                for decl in node.children_by_field_name("declarator", &mut dc) {
                    let Some(n) = decl.child_by_field_name("name") else {
                        continue;
                    };
                    let value = decl.child_by_field_name("value");
                    let ty = declared_or_inferred(ty_node, value, src);
                    self.facts.locals.push(LocalDecl {
                        name: text(n, src).to_string(),
                        type_name: ty,
                        start: decl.start_byte(),
                        init: value.map(|v| (v.start_byte(), v.end_byte())),
                        snippet: text(node, src).trim().to_string(),
                    });
                }
            }
            "resource" => {
                if let (Some(n), Some(v)) = (
                    node.child_by_field_name("name"),
                    node.child_by_field_name("value"),
                ) {
                    let ty = declared_or_inferred(node.child_by_field_name("type"), Some(v), src);
                    self.facts.locals.push(LocalDecl {
                        name: text(n, src).to_string(),
                        type_name: ty,
                        start: node.start_byte(),
                        init: Some((v.start_byte(), v.end_byte())),
                        snippet: text(node, src).trim().to_string(),
                    });
                }
            }
            "enhanced_for_statement" | "catch_formal_parameter" => {
                let ty = node
                    .child_by_field_name("type")
                    .or_else(|| {
                        let mut c = node.walk();
                        let t = node
                            .named_children(&mut c)
                            .find(|c| c.kind() == "catch_type")
                            .and_then(|c| c.named_child(0));
                        t
                    })
                    .map(|t| simple_type(t, src));
                if let (Some(ty), Some(n)) = (ty, node.child_by_field_name("name")) {
                    self.facts.locals.push(LocalDecl {
                        name: text(n, src).to_string(),
                        type_name: ty,
                        start: n.start_byte(),
                        init: None,
                        snippet: String::new(),
                    });
                }
            }
            _ => {}
        }
        let mut cursor = node.walk();
        for c in node.named_children(&mut cursor) {
            self.collect_locals(c);
        }
    }

    fn var_type(&self, name: &str, at: usize) -> Option<String> {
        let local = self
            .facts
            .locals
            .iter()
            .filter(|l| l.name == name && l.start <= at)
            .last()
            .or_else(|| self.facts.locals.iter().find(|l| l.name == name));
        if let Some(l) = local {
            return Some(l.type_name.clone());
        }
        self.params
            .get(name)
            .or_else(|| self.class.fields.get(name))
            .cloned()
    }

    fn receiver_of(&self, node: Node) -> Receiver {
        let src = self.src();
        match node.kind() {
            "identifier" => {
                let name = text(node, src);
                match self.var_type(name, node.start_byte()) {
                    Some(t) => Receiver::Typed(t),
                    None if name.starts_with(|c: char| c.is_ascii_uppercase()) => {
                        Receiver::Static(name.to_string())
                    }
                    None => Receiver::Unknown,
                }
            }
            "this" => Receiver::Typed(self.class.name.clone()),
            "super" => match &self.class.superclass {
                Some(s) => Receiver::Typed(s.clone()),
                None => Receiver::Unknown,
            },
            "field_access" => {
                let object = node.child_by_field_name("object");
                let field = node.child_by_field_name("field").map(|f| text(f, src));
                match (object.map(|o| o.kind()), field) {
                    (Some("this"), Some(f)) => self
                        .class
                        .fields
                        .get(f)
                        .map(|t| Receiver::Typed(t.clone()))
                        .unwrap_or(Receiver::Unknown),
                    _ => Receiver::Unknown,
                }
            }
            "object_creation_expression" => node
                .child_by_field_name("type")
                .map(|t| Receiver::Typed(simple_type(t, src)))
                .unwrap_or(Receiver::Unknown),
            "method_invocation" => {
                let method = node
                    .child_by_field_name("name")
                    .map(|n| text(n, src).to_string())
                    .unwrap_or_default();
                let arity = node
                    .child_by_field_name("arguments")
                    .map(|a| a.named_child_count())
                    .unwrap_or(0);
                let on = match node.child_by_field_name("object") {
                    Some(o) => self.receiver_of(o),
                    None => self.implicit_receiver(&method),
                };
                Receiver::Call {
                    on: Box::new(on),
                    method,
                    arity,
                }
            }
            "parenthesized_expression" => node
                .named_child(0)
                .map(|n| self.receiver_of(n))
                .unwrap_or(Receiver::Unknown),
            "cast_expression" => node
                .child_by_field_name("type")
                .map(|t| Receiver::Typed(simple_type(t, src)))
                .unwrap_or(Receiver::Unknown),
            "string_literal" => Receiver::Typed("String".into()),
            _ => Receiver::Unknown,
        }
    }

    fn implicit_receiver(&self, method: &str) -> Receiver {
        match self.ctx.static_imports.get(method) {
            Some(class) => Receiver::Static(class.clone()),
            None => Receiver::Implicit,
        }
    }

    fn binding_of(&self, node: Node) -> Option<String> {
        let src = self.src();
        let parent = node.parent()?;
        match parent.kind() {
            "variable_declarator" | "resource" => {
                if parent.child_by_field_name("value") == Some(node) {
                    parent
                        .child_by_field_name("name")
                        .map(|n| text(n, src).to_string())
                } else {
                    None
                }
            }
            "assignment_expression" => {
                if parent.child_by_field_name("right") != Some(node) {
                    return None;
                }
                let left = parent.child_by_field_name("left")?;
                match left.kind() {
                    "identifier" => Some(text(left, src).to_string()),
                    "field_access" => left
                        .child_by_field_name("field")
                        .map(|f| text(f, src).to_string()),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn is_use(&self, node: Node) -> bool {
        let Some(parent) = node.parent() else {
            return true;
        };
        let named_slot = |field: &str| parent.child_by_field_name(field) == Some(node);
        match parent.kind() {
            "variable_declarator" | "formal_parameter" | "catch_formal_parameter"
            | "enhanced_for_statement" | "resource" | "method_invocation"
            | "method_declaration" | "class_declaration" | "labeled_statement" => {
                !named_slot("name")
            }
            "field_access" => {
                if named_slot("field") {
                    parent
                        .child_by_field_name("object")
                        .is_some_and(|o| o.kind() == "this")
                } else {
                    true
                }
            }
            "lambda_expression" | "inferred_parameters" => false,
            _ => true,
        }
    }

    fn walk(&mut self, node: Node) {
        let src = self.ctx.src;
        match node.kind() {
            "identifier" | "type_identifier" => {
                let t = text(node, src);
                self.facts.tokens.push(t.to_string());
                if node.kind() == "identifier" && self.is_use(node) {
                    self.facts.ident_uses.push(IdentUse {
                        name: t.to_string(),
                        offset: node.start_byte(),
                    });
                }
            }
            "method_invocation" => {
                let callee = node
                    .child_by_field_name("name")
                    .map(|n| text(n, src).to_string())
                    .unwrap_or_default();
                let object = node.child_by_field_name("object");
                let receiver = match object {
                    Some(o) => self.receiver_of(o),
                    None => self.implicit_receiver(&callee),
                };
                let receiver_var = object
                    .filter(|o| o.kind() == "identifier")
                    .map(|o| text(o, src).to_string())
                    .or_else(|| {
                        object
                            .filter(|o| o.kind() == "field_access")
                            .filter(|o| {
                                o.child_by_field_name("object")
                                    .is_some_and(|x| x.kind() == "this")
                            })
                            .and_then(|o| o.child_by_field_name("field"))
                            .map(|f| text(f, src).to_string())
                    });
                let (arg_count, arg_idents) = match node.child_by_field_name("arguments") {
                    Some(args) => {
                        let mut ac = args.walk();
                        let idents = args
                            .named_children(&mut ac)
                            .filter(|a| a.kind() == "identifier")
                            .map(|a| text(a, src).to_string())
                            .collect();
                        (args.named_child_count(), idents)
                    }
                    None => (0, Vec::new()),
                };
                self.facts.calls.push(CallSite {
                    callee,
                    receiver,
                    receiver_var,
                    arg_count,
                    arg_idents,
                    start: node.start_byte(),
                    end: node.end_byte(),
                    bound_to: self.binding_of(node),
                });
            }
            "object_creation_expression" => {
                if let Some(t) = node.child_by_field_name("type") {
                    self.facts.creations.push(Creation {
                        type_name: simple_type(t, src),
                        start: node.start_byte(),
                        end: node.end_byte(),
                        bound_to: self.binding_of(node),
                        snippet: text(node, src).to_string(),
                    });
                }
            }
            _ => {}
        }
        let mut cursor = node.walk();
        for c in node.children(&mut cursor) {
            if c.is_named() {
                self.walk(c);
            }
        }
    }
}

fn declared_or_inferred(ty: Option<Node>, value: Option<Node>, src: &str) -> String {
    let declared = ty.map(|t| simple_type(t, src)).unwrap_or_default();
    if declared == "var" || declared.is_empty() {
        if let Some(v) = value.filter(|v| v.kind() == "object_creation_expression") {
            if let Some(t) = v.child_by_field_name("type") {
                return simple_type(t, src);
            }
        }
    }
    declared
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r#"
package com.acme;
import static org.junit.Assert.assertEquals;
import static org.junit.Assert.*;
import java.io.File;
import com.acme.Calculator;
public class FooTest extends Base {
  private File dir;
  @org.junit.Test public void t() throws Exception {
    Calculator c = new Calculator();
    assertEquals(3, c.add(1, 2));
    var g = new File("a.txt");
    if (g.exists()) { g = null; }
    this.dir.delete();
    new Foo().bar().baz();
  }
  static class Inner { void helper() {} }
}
"#;

    #[test]
    fn reads_declarations() {
        let f = parse_java("FooTest.java".into(), SRC);
        assert_eq!(f.package.as_deref(), Some("com.acme"));
        assert_eq!(f.imports, vec!["java.io.File", "com.acme.Calculator"]);
        assert_eq!(f.static_imports.get("assertEquals").map(String::as_str), Some("Assert"));
        assert_eq!(f.classes.len(), 2);
        let c = &f.classes[0];
        assert_eq!(c.qualified, "com.acme.FooTest");
        assert_eq!(c.superclass.as_deref(), Some("Base"));
        assert_eq!(c.fields.get("dir").map(String::as_str), Some("File"));
        assert_eq!(f.classes[1].display_name, "FooTest.Inner");
        let m = &c.methods[0];
        assert_eq!(m.annotations, vec!["Test"]);
        assert!(m.is_public && m.is_void());
        assert!(c.instantiated.contains("Calculator") && c.instantiated.contains("File"));
    }

    #[test]
    fn resolves_receivers_lexically() {
        let f = parse_java("FooTest.java".into(), SRC);
        let body = f.classes[0].methods[0].body.as_ref().unwrap();
        let calls: Vec<_> = body.calls.iter().map(|c| (c.callee.as_str(), &c.receiver)).collect();
        assert_eq!(calls[0], ("assertEquals", &Receiver::Static("Assert".into())));
        assert_eq!(calls[1], ("add", &Receiver::Typed("Calculator".into())));
        assert_eq!(calls[2], ("exists", &Receiver::Typed("File".into())));
        assert_eq!(calls[3], ("delete", &Receiver::Typed("File".into())));
        assert_eq!(body.calls[3].receiver_var.as_deref(), Some("dir"));
        assert_eq!(calls[4].0, "baz");
        assert!(matches!(calls[4].1, Receiver::Call { method, .. } if method == "bar"));
        assert_eq!(calls[5], ("bar", &Receiver::Typed("Foo".into())));
        assert_eq!(body.creations[1].bound_to.as_deref(), Some("g"));
        assert_eq!(body.locals[1].type_name, "File");
    }

    #[test]
    fn declarator_names_are_not_uses() {
        let f = parse_java("FooTest.java".into(), SRC);
        let body = f.classes[0].methods[0].body.as_ref().unwrap();
        let g_uses: Vec<_> = body.ident_uses.iter().filter(|u| u.name == "g").collect();
        // `g.exists()` and the assignment target, not the declarator.
        assert_eq!(g_uses.len(), 2);
        assert!(body.ident_uses.iter().any(|u| u.name == "dir"));
    }
}
