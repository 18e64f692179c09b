//! Recognition of external-resource references in a test body.
//!
//! A reference is one of:
//! - `new T(..)` where `T` is a resource type;
//! - a static call `T.m(..)` on a resource type that acquires something new,
//!   i.e. none of its arguments is itself a resource expression or handle;
//! - a local variable of resource type not already bound to one of the above;
//! - a field of resource type that the body uses.
//!
//! A reference is state-checked when a guard call on its handle
//! (`f.exists()`, `Files.exists(p)`, `c.isClosed()`, ...) appears lexically
//! after the reference and before the handle's first other use.

use super::java::{BodyFacts, Receiver};
use super::{Keywords, ResourceKind, ResourceRef, TestCase};

struct Candidate {
    kind: ResourceKind,
    expression: String,
    handle: Option<String>,
    start: usize,
    end: usize,
}

pub fn classify_resource_refs(test: &TestCase, keywords: &Keywords) -> Vec<ResourceRef> {
    classify_body(&test.facts, keywords)
}

pub(crate) fn classify_body(body: &BodyFacts, keywords: &Keywords) -> Vec<ResourceRef> {
    let mut found: Vec<Candidate> = Vec::new();

    let creations: Vec<_> = body
        .creations
        .iter()
        .filter_map(|c| keywords.kind_of(&c.type_name).map(|k| (k, c)))
        .collect();
    for (kind, c) in &creations {
        found.push(Candidate {
            kind: *kind,
            expression: c.snippet.clone(),
            handle: c.bound_to.clone(),
            start: c.start,
            end: c.end,
        });
    }

    let resource_locals: Vec<_> = body
        .locals
        .iter()
        .filter_map(|l| keywords.kind_of(&l.type_name).map(|k| (k, l)))
        .collect();
    let resource_fields: Vec<_> = body
        .fields
        .iter()
        .filter(|(name, _)| !body.locals.iter().any(|l| &l.name == *name))
        .filter_map(|(name, ty)| keywords.kind_of(ty).map(|k| (k, name, ty)))
        .collect();
    let is_handle = |name: &str| {
        resource_locals.iter().any(|(_, l)| l.name == name)
            || resource_fields.iter().any(|(_, f, _)| f.as_str() == name)
            || creations
                .iter()
                .any(|(_, c)| c.bound_to.as_deref() == Some(name))
    };

    let static_calls: Vec<_> = body
        .calls
        .iter()
        .filter(|c| !keywords.is_any_guard(&c.callee))
        .filter_map(|c| match &c.receiver {
            Receiver::Static(t) => keywords.kind_of(t).map(|k| (k, t, c)),
            _ => None,
        })
        .collect();
    for (kind, ty, call) in &static_calls {
        let inside = |s: usize, e: usize| call.start <= s && e <= call.end && (s, e) != (call.start, call.end);
        let wraps_resource = creations.iter().any(|(_, c)| inside(c.start, c.end))
            || static_calls.iter().any(|(_, _, o)| inside(o.start, o.end))
            || body
                .ident_uses
                .iter()
                .any(|u| call.start <= u.offset && u.offset < call.end && is_handle(&u.name));
        if wraps_resource {
            continue;
        }
        found.push(Candidate {
            kind: *kind,
            expression: format!("{ty}.{}(..)", call.callee),
            handle: call.bound_to.clone(),
            start: call.start,
            end: call.end,
        });
    }

    for (kind, local) in &resource_locals {
        if found.iter().any(|c| c.handle.as_deref() == Some(local.name.as_str())) {
            continue;
        }
        let end = local.init.map(|(_, e)| e).unwrap_or(local.start);
        found.push(Candidate {
            kind: *kind,
            expression: if local.snippet.is_empty() {
                format!("{} {}", local.type_name, local.name)
            } else {
                local.snippet.clone()
            },
            handle: Some(local.name.clone()),
            start: local.start,
            end,
        });
    }

    for (kind, name, ty) in &resource_fields {
        if found.iter().any(|c| c.handle.as_deref() == Some(name.as_str())) {
            continue;
        }
        if let Some(first) = body.ident_uses.iter().find(|u| &u.name == *name) {
            found.push(Candidate {
                kind: *kind,
                expression: format!("{ty} {name}"),
                handle: Some((*name).clone()),
                start: first.offset,
                // Every use of a field counts, including the first one.
                end: first.offset.saturating_sub(1),
            });
        }
    }

    found.sort_by_key(|c| c.start);
    found
        .into_iter()
        .map(|c| ResourceRef {
            state_checked: c
                .handle
                .as_deref()
                .is_some_and(|h| is_state_checked(body, keywords, c.kind, h, c.end)),
            kind: c.kind,
            expression: c.expression,
            handle: c.handle,
            offset: c.start,
        })
        .collect()
}

fn is_state_checked(
    body: &BodyFacts,
    keywords: &Keywords,
    kind: ResourceKind,
    handle: &str,
    after: usize,
) -> bool {
    let guards: Vec<_> = body
        .calls
        .iter()
        .filter(|c| c.start >= after && keywords.is_guard(kind, &c.callee))
        .filter(|c| {
            c.receiver_var.as_deref() == Some(handle) || c.arg_idents.iter().any(|a| a == handle)
        })
        .collect();
    if guards.is_empty() {
        return false;
    }
    let first_use = body
        .ident_uses
        .iter()
        .filter(|u| u.name == handle && u.offset > after)
        .filter(|u| !guards.iter().any(|g| g.start <= u.offset && u.offset < g.end))
        .map(|u| u.offset)
        .min();
    match first_use {
        Some(use_at) => guards.iter().any(|g| g.start < use_at),
        None => true,
    }
}
