//! Ciphertext-policy attribute-based key encapsulation.
//!
//! A document key K (target-group element) is hidden under an access tree:
//! the tree's root secret r0 is shared top-down through per-node
//! polynomials, each leaf publishes (g^{q_n(0)}, H(att)^{q_n(0)}), and a
//! user whose attribute key satisfies the tree reconstructs
//! e(g,g)^{u*r0} by Lagrange recombination and peels K out of
//! C = K * X^{r0}.
//!
//! Pairing-argument orientation: inside the asymmetric facade the leaf
//! ratio is evaluated as e(S_m, C_n) / e(C'_n, S'_m), which keeps every
//! hashed element in the left slot so its independently hashed halves
//! cancel. For a symmetric pairing this is the same expression as the
//! usual e(S_m, C_n) / e(S'_m, C'_n).

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, Rng};

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::group::{setup_group, CanonicalEncode, GroupContext, Gt, Scalar, G1};
use crate::policy::{AccessTree, Node};

const ATTR_LABEL_PREFIX: &[u8] = b"esas/v1/attr:";

/// Public parameters published by the key generation center.
///
/// `h` is g^beta: the ciphertext component C1 = g^{beta*r0} is computed by
/// data owners who do not hold beta, so its base must be public.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub ctx: GroupContext,
    pub g: G1,
    pub g_a: G1,
    pub g_b: G1,
    pub h: G1,
    pub x: Gt,
}

/// Key generation center secrets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecret {
    pub alpha: Scalar,
    pub beta: Scalar,
    pub a: Scalar,
    pub b: Scalar,
}

/// Attribute secret key of one user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserKey {
    pub attributes: BTreeSet<String>,
    /// g^{(alpha+u)/beta}
    pub s: G1,
    /// g^u
    pub s1: G1,
    /// per attribute: (g^u * H(at)^{r_m}, g^{r_m})
    pub components: BTreeMap<String, (G1, G1)>,
}

/// Encapsulation of a document key under an access tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyCiphertext {
    pub tree: AccessTree,
    /// K * X^{r0}
    pub c: Gt,
    /// g^s
    pub c0: G1,
    /// g^{beta*r0}
    pub c1: G1,
    /// g^{s-r0}
    pub c2: G1,
    /// per leaf, aligned with `tree.leaves()`: (g^{q_n(0)}, H(att(n))^{q_n(0)})
    pub leaf_components: Vec<(G1, G1)>,
}

/// Hash of an attribute string into the source group, domain-separated
/// from every other label space in the protocol.
pub fn attribute_element(ctx: &GroupContext, attribute: &str) -> G1 {
    let mut label = Vec::with_capacity(ATTR_LABEL_PREFIX.len() + attribute.len());
    label.extend_from_slice(ATTR_LABEL_PREFIX);
    label.extend_from_slice(attribute.as_bytes());
    ctx.hash_to_g1(&label)
}

/// KGC initialization: draws the master secrets and publishes PP.
pub fn system_setup<R: Rng + CryptoRng>(
    ctx: GroupContext,
    rng: &mut R,
) -> (SystemParams, MasterSecret) {
    let alpha = Scalar::rand_nonzero(rng);
    let beta = Scalar::rand_nonzero(rng);
    let a = Scalar::rand_nonzero(rng);
    let b = Scalar::rand_nonzero(rng);
    let g = ctx.generator();
    let params = SystemParams {
        ctx,
        g,
        g_a: g.pow(&a),
        g_b: g.pow(&b),
        h: g.pow(&beta),
        x: ctx.pair(&g, &g).pow(&alpha),
    };
    (params, MasterSecret { alpha, beta, a, b })
}

/// Issues an attribute key bound to a fresh user secret u.
pub fn user_keygen<R: Rng + CryptoRng>(
    params: &SystemParams,
    msk: &MasterSecret,
    attributes: &BTreeSet<String>,
    rng: &mut R,
) -> Result<UserKey> {
    if attributes.is_empty() {
        return Err(Error::EmptyAttributeSet);
    }
    let u = Scalar::rand_nonzero(rng);
    let beta_inv = msk.beta.inverse().expect("beta is sampled nonzero");
    let s = params.g.pow(&msk.alpha.add(&u).mul(&beta_inv));
    let s1 = params.g.pow(&u);
    let mut components = BTreeMap::new();
    for attribute in attributes {
        let r_m = Scalar::rand_nonzero(rng);
        let s_m = s1.mul(&attribute_element(&params.ctx, attribute).pow(&r_m));
        let s_m_prime = params.g.pow(&r_m);
        components.insert(attribute.clone(), (s_m, s_m_prime));
    }
    Ok(UserKey {
        attributes: attributes.clone(),
        s,
        s1,
        components,
    })
}

/// Top-down secret sharing over the tree: every gate with threshold k gets
/// a random degree k-1 polynomial with q(0) equal to its inherited share;
/// child i inherits q(i). Returns the per-leaf shares q_n(0) in
/// `tree.leaves()` order.
pub fn share_root_secret<R: Rng + CryptoRng>(
    tree: &AccessTree,
    r0: &Scalar,
    rng: &mut R,
) -> Vec<Scalar> {
    let mut shares = Vec::with_capacity(tree.leaf_count());
    share_node(tree.root(), *r0, rng, &mut shares);
    shares
}

fn share_node<R: Rng + CryptoRng>(node: &Node, share: Scalar, rng: &mut R, out: &mut Vec<Scalar>) {
    match node {
        Node::Leaf { .. } => out.push(share),
        Node::Gate {
            threshold,
            children,
        } => {
            // q(0) = share; higher coefficients random
            let coeffs: Vec<Scalar> = std::iter::once(share)
                .chain((1..*threshold).map(|_| Scalar::rand_nonzero(rng)))
                .collect();
            for (i, child) in children.iter().enumerate() {
                let point = Scalar::from_u64(i as u64 + 1);
                share_node(child, eval_poly(&coeffs, &point), rng, out);
            }
        }
    }
}

fn eval_poly(coeffs: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::ZERO;
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

/// Lagrange coefficient Delta_{i,S}(0) for index i over the point set S.
pub fn lagrange_at_zero(i: u64, points: &[u64]) -> Scalar {
    let xi = Scalar::from_u64(i);
    let mut acc = Scalar::ONE;
    for &j in points {
        if j == i {
            continue;
        }
        let xj = Scalar::from_u64(j);
        let num = xj.neg();
        let den = xi.sub(&xj);
        acc = acc.mul(&num.mul(&den.inverse().expect("distinct interpolation points")));
    }
    acc
}

/// Encapsulates a fresh document key under the access tree. Returns the
/// key K (a target-group element; its symmetric form is `kdf_key(&k)`)
/// and the ciphertext component CK.
pub fn encapsulate_key<R: Rng + CryptoRng>(
    params: &SystemParams,
    tree: &AccessTree,
    rng: &mut R,
) -> (Gt, KeyCiphertext) {
    let k = params.ctx.rand_gt(rng);
    let s = Scalar::rand_nonzero(rng);
    let r0 = Scalar::rand_nonzero(rng);
    let shares = share_root_secret(tree, &r0, rng);
    let leaf_components = tree
        .leaves()
        .iter()
        .zip(&shares)
        .map(|(attribute, share)| {
            (
                params.g.pow(share),
                attribute_element(&params.ctx, attribute).pow(share),
            )
        })
        .collect();
    let ck = KeyCiphertext {
        tree: tree.clone(),
        c: k.mul(&params.x.pow(&r0)),
        c0: params.g.pow(&s),
        c1: params.h.pow(&r0),
        c2: params.g.pow(&s.sub(&r0)),
        leaf_components,
    };
    (k, ck)
}

/// Decrypts one leaf: e(S_m, C_n) / e(C'_n, S'_m) = e(g,g)^{u*q_n(0)}.
pub fn leaf_decrypt(
    ctx: &GroupContext,
    ukey: &UserKey,
    ck: &KeyCiphertext,
    leaf_index: usize,
) -> Result<Gt> {
    let leaves = ck.tree.leaves();
    let attribute = *leaves
        .get(leaf_index)
        .ok_or_else(|| Error::InvalidParameter(format!("leaf index {leaf_index} out of range")))?;
    let (s_m, s_m_prime) = ukey
        .components
        .get(attribute)
        .ok_or_else(|| Error::AttributeNotHeld(attribute.to_string()))?;
    let (c_n, c_n_prime) = &ck.leaf_components[leaf_index];
    // single Miller loop for the ratio
    Ok(ctx.pair_product(&[(*s_m, *c_n), (c_n_prime.inverse(), *s_m_prime)]))
}

/// Recombines decrypted leaf values up the tree.
///
/// A gate is live when at least `threshold` children are live; the lowest-
/// indexed k live children are combined with Lagrange exponents. Returns
/// `None` when the values present do not satisfy the tree.
pub fn reconstruct_root(tree: &AccessTree, leaf_values: &BTreeMap<usize, Gt>) -> Option<Gt> {
    let mut next_leaf = 0usize;
    reconstruct_node(tree.root(), leaf_values, &mut next_leaf)
}

fn reconstruct_node(
    node: &Node,
    leaf_values: &BTreeMap<usize, Gt>,
    next_leaf: &mut usize,
) -> Option<Gt> {
    match node {
        Node::Leaf { .. } => {
            let value = leaf_values.get(next_leaf).copied();
            *next_leaf += 1;
            value
        }
        Node::Gate {
            threshold,
            children,
        } => {
            // evaluate every child to keep the leaf cursor consistent
            let evaluated: Vec<Option<Gt>> = children
                .iter()
                .map(|child| reconstruct_node(child, leaf_values, next_leaf))
                .collect();
            let live: Vec<(u64, Gt)> = evaluated
                .into_iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i as u64 + 1, v)))
                .collect();
            if live.len() < *threshold {
                return None;
            }
            let chosen = &live[..*threshold];
            let points: Vec<u64> = chosen.iter().map(|(i, _)| *i).collect();
            let mut acc = Gt::identity();
            for (i, value) in chosen {
                acc = acc.mul(&value.pow(&lagrange_at_zero(*i, &points)));
            }
            Some(acc)
        }
    }
}

/// The root-equation check: e(C2, S1) * M_r == e(C0, S1).
///
/// Both pairings share S1, so the check reduces to one pairing of the
/// quotient: e(C2/C0, S1) * M_r == 1.
pub fn check_root_equation(ctx: &GroupContext, ck: &KeyCiphertext, s1: &G1, m_r: &Gt) -> bool {
    ctx.pair(&ck.c2.mul(&ck.c0.inverse()), s1)
        .mul(m_r)
        .is_identity()
}

/// Full authorization test: leaf decryption for every held attribute,
/// root reconstruction, then the root equation.
pub fn verify_authorization(ctx: &GroupContext, ck: &KeyCiphertext, ukey: &UserKey) -> bool {
    let m_r = match authorize(ctx, ck, ukey) {
        Some(v) => v,
        None => return false,
    };
    check_root_equation(ctx, ck, &ukey.s1, &m_r)
}

/// Leaf decryption plus reconstruction; `None` when the tree is
/// unsatisfied by the key's attributes.
pub fn authorize(ctx: &GroupContext, ck: &KeyCiphertext, ukey: &UserKey) -> Option<Gt> {
    let mut leaf_values = BTreeMap::new();
    for (index, attribute) in ck.tree.leaves().iter().enumerate() {
        if ukey.attributes.contains(*attribute) {
            let value = leaf_decrypt(ctx, ukey, ck, index).expect("attribute is held");
            leaf_values.insert(index, value);
        }
    }
    reconstruct_root(&ck.tree, &leaf_values)
}

/// Recovers the encapsulated key: K = C / (e(C1, S) / M_r).
///
/// Callers gate on [`verify_authorization`]; an invalid M_r yields garbage,
/// not an error.
pub fn decapsulate_key(ctx: &GroupContext, ck: &KeyCiphertext, ukey: &UserKey, m_r: &Gt) -> Gt {
    ck.c.div(&ctx.pair(&ck.c1, &ukey.s).div(m_r))
}

// --- serialization ---

fn put_g1(w: &mut ByteWriter, v: &G1) {
    w.put_bytes(&v.to_canonical_bytes());
}

fn get_g1(r: &mut ByteReader) -> Result<G1> {
    G1::from_canonical_bytes(r.get_bytes()?)
}

fn put_gt(w: &mut ByteWriter, v: &Gt) {
    w.put_bytes(&v.to_canonical_bytes());
}

fn get_gt(r: &mut ByteReader) -> Result<Gt> {
    Gt::from_canonical_bytes(r.get_bytes()?)
}

fn put_scalar(w: &mut ByteWriter, v: &Scalar) {
    w.put_bytes(&v.to_canonical_bytes());
}

fn get_scalar(r: &mut ByteReader) -> Result<Scalar> {
    Scalar::from_canonical_bytes(r.get_bytes()?)
}

impl SystemParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_u32(self.ctx.security_level());
        put_g1(&mut w, &self.g);
        put_g1(&mut w, &self.g_a);
        put_g1(&mut w, &self.g_b);
        put_g1(&mut w, &self.h);
        put_gt(&mut w, &self.x);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let ctx = setup_group(r.get_u32()?)?;
        let out = SystemParams {
            ctx,
            g: get_g1(&mut r)?,
            g_a: get_g1(&mut r)?,
            g_b: get_g1(&mut r)?,
            h: get_g1(&mut r)?,
            x: get_gt(&mut r)?,
        };
        r.finish()?;
        Ok(out)
    }
}

impl MasterSecret {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        put_scalar(&mut w, &self.alpha);
        put_scalar(&mut w, &self.beta);
        put_scalar(&mut w, &self.a);
        put_scalar(&mut w, &self.b);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let out = MasterSecret {
            alpha: get_scalar(&mut r)?,
            beta: get_scalar(&mut r)?,
            a: get_scalar(&mut r)?,
            b: get_scalar(&mut r)?,
        };
        r.finish()?;
        Ok(out)
    }
}

impl UserKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        put_g1(&mut w, &self.s);
        put_g1(&mut w, &self.s1);
        w.put_u32(self.components.len() as u32);
        for (attribute, (s_m, s_m_prime)) in &self.components {
            w.put_str(attribute);
            put_g1(&mut w, s_m);
            put_g1(&mut w, s_m_prime);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let s = get_g1(&mut r)?;
        let s1 = get_g1(&mut r)?;
        let count = r.get_u32()? as usize;
        let mut components = BTreeMap::new();
        for _ in 0..count {
            let attribute = r.get_str()?;
            let s_m = get_g1(&mut r)?;
            let s_m_prime = get_g1(&mut r)?;
            components.insert(attribute, (s_m, s_m_prime));
        }
        r.finish()?;
        Ok(UserKey {
            attributes: components.keys().cloned().collect(),
            s,
            s1,
            components,
        })
    }
}

impl KeyCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(&self.tree.to_bytes());
        put_gt(&mut w, &self.c);
        put_g1(&mut w, &self.c0);
        put_g1(&mut w, &self.c1);
        put_g1(&mut w, &self.c2);
        w.put_u32(self.leaf_components.len() as u32);
        for (c_n, c_n_prime) in &self.leaf_components {
            put_g1(&mut w, c_n);
            put_g1(&mut w, c_n_prime);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let tree = AccessTree::from_bytes(r.get_bytes()?)?;
        let c = get_gt(&mut r)?;
        let c0 = get_g1(&mut r)?;
        let c1 = get_g1(&mut r)?;
        let c2 = get_g1(&mut r)?;
        let count = r.get_u32()? as usize;
        let mut leaf_components = Vec::with_capacity(count);
        for _ in 0..count {
            let c_n = get_g1(&mut r)?;
            let c_n_prime = get_g1(&mut r)?;
            leaf_components.push((c_n, c_n_prime));
        }
        r.finish()?;
        if leaf_components.len() != tree.leaf_count() {
            return Err(Error::Decode(
                "leaf component count does not match tree".into(),
            ));
        }
        Ok(KeyCiphertext {
            tree,
            c,
            c0,
            c1,
            c2,
            leaf_components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::parse_policy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn attrs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn setup(seed: u64) -> (SystemParams, MasterSecret, ChaCha20Rng) {
        let ctx = setup_group(128).unwrap();
        let mut rng = rng(seed);
        let (params, msk) = system_setup(ctx, &mut rng);
        (params, msk, rng)
    }

    #[test]
    fn setup_publishes_x_matching_alpha() {
        let (params, msk, _) = setup(1);
        let expect = params.ctx.pair(&params.g, &params.g).pow(&msk.alpha);
        assert_eq!(params.x, expect);
        assert_eq!(params.h, params.g.pow(&msk.beta));
        assert_eq!(msk.beta.mul(&msk.beta.inverse().unwrap()), Scalar::ONE);
    }

    #[test]
    fn setup_draws_fresh_secrets() {
        let (p1, _, _) = setup(2);
        let (p2, _, _) = setup(3);
        assert_ne!(p1.x, p2.x);
    }

    #[test]
    fn user_key_satisfies_defining_identities() {
        let (params, msk, mut rng) = setup(4);
        let key = user_keygen(&params, &msk, &attrs(&["doctor", "nurse"]), &mut rng).unwrap();
        let ctx = params.ctx;

        // e(S, g^beta) = X * e(S1, g)
        let g_beta = params.g.pow(&msk.beta);
        let lhs = ctx.pair(&key.s, &g_beta);
        let rhs = params.x.mul(&ctx.pair(&key.s1, &params.g));
        assert_eq!(lhs, rhs);

        // per attribute: e(S_m, g) = e(S1, g) * e(H(at), S'_m)
        for attribute in &key.attributes {
            let (s_m, s_m_prime) = &key.components[attribute];
            let lhs = ctx.pair(s_m, &params.g);
            let rhs = ctx
                .pair(&key.s1, &params.g)
                .mul(&ctx.pair(&attribute_element(&ctx, attribute), s_m_prime));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn user_keys_carry_fresh_u() {
        let (params, msk, mut rng) = setup(5);
        let a = user_keygen(&params, &msk, &attrs(&["doctor"]), &mut rng).unwrap();
        let b = user_keygen(&params, &msk, &attrs(&["doctor"]), &mut rng).unwrap();
        assert_ne!(a.s1, b.s1);
    }

    #[test]
    fn empty_attribute_set_is_rejected() {
        let (params, msk, mut rng) = setup(6);
        assert!(matches!(
            user_keygen(&params, &msk, &BTreeSet::new(), &mut rng),
            Err(Error::EmptyAttributeSet)
        ));
    }

    #[test]
    fn single_leaf_share_is_the_root_secret() {
        let tree = parse_policy("alone").unwrap();
        let mut rng = rng(7);
        let r0 = Scalar::rand_nonzero(&mut rng);
        let shares = share_root_secret(&tree, &r0, &mut rng);
        assert_eq!(shares, vec![r0]);
    }

    #[test]
    fn or_gate_children_inherit_the_parent_share() {
        let tree = parse_policy("or(a, b)").unwrap();
        let mut rng = rng(8);
        let r0 = Scalar::rand_nonzero(&mut rng);
        let shares = share_root_secret(&tree, &r0, &mut rng);
        // degree-0 polynomial: every evaluation equals r0
        assert_eq!(shares, vec![r0, r0]);
    }

    #[test]
    fn two_of_three_shares_interpolate_to_the_secret() {
        let tree = parse_policy("2-of(a, b, c)").unwrap();
        let mut rng = rng(9);
        let r0 = Scalar::rand_nonzero(&mut rng);
        let shares = share_root_secret(&tree, &r0, &mut rng);
        assert_eq!(shares.len(), 3);
        for (i, j) in [(1u64, 2u64), (1, 3), (2, 3)] {
            let points = [i, j];
            let recovered = shares[i as usize - 1]
                .mul(&lagrange_at_zero(i, &points))
                .add(&shares[j as usize - 1].mul(&lagrange_at_zero(j, &points)));
            assert_eq!(recovered, r0);
        }
    }

    #[test]
    fn ciphertext_components_satisfy_their_equations() {
        let (params, msk, mut rng) = setup(10);
        let tree = parse_policy("and(a, b)").unwrap();
        let (_k, ck) = encapsulate_key(&params, &tree, &mut rng);
        let ctx = params.ctx;

        // exponent identity s = r0 + (s - r0), checked with beta known
        let beta_inv = msk.beta.inverse().unwrap();
        let lhs = ctx.pair(&ck.c0, &params.g);
        let rhs = ctx
            .pair(&ck.c1, &params.g)
            .pow(&beta_inv)
            .mul(&ctx.pair(&ck.c2, &params.g));
        assert_eq!(lhs, rhs);

        // leaf components share the exponent q_n(0)
        for (index, attribute) in ck.tree.leaves().iter().enumerate() {
            let (c_n, c_n_prime) = &ck.leaf_components[index];
            let h_at = attribute_element(&ctx, attribute);
            assert_eq!(ctx.pair(c_n, &h_at), ctx.pair(&params.g, c_n_prime));
        }
    }

    #[test]
    fn fresh_randomness_every_encapsulation() {
        let (params, _msk, mut rng) = setup(11);
        let tree = parse_policy("and(a, b)").unwrap();
        let (_, ck1) = encapsulate_key(&params, &tree, &mut rng);
        let (_, ck2) = encapsulate_key(&params, &tree, &mut rng);
        assert_ne!(ck1.c.to_canonical_bytes(), ck2.c.to_canonical_bytes());
        assert_ne!(ck1.c0, ck2.c0);
        assert_ne!(ck1.leaf_components[0].0, ck2.leaf_components[0].0);
    }

    #[test]
    fn leaf_decrypt_matches_independent_recomputation() {
        let (params, msk, mut rng) = setup(12);
        let tree = parse_policy("or(a, b)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a"]), &mut rng).unwrap();
        let ctx = params.ctx;

        let m = leaf_decrypt(&ctx, &key, &ck, 0).unwrap();
        // cross-check: e(g^u, g^{q_n(0)}) via the published S1 and C_n
        let expected = ctx.pair(&key.s1, &ck.leaf_components[0].0);
        assert_eq!(m, expected);
    }

    #[test]
    fn leaf_decrypt_requires_the_attribute() {
        let (params, msk, mut rng) = setup(13);
        let tree = parse_policy("or(a, b)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a"]), &mut rng).unwrap();
        assert!(matches!(
            leaf_decrypt(&params.ctx, &key, &ck, 1),
            Err(Error::AttributeNotHeld(_))
        ));
    }

    #[test]
    fn or_branches_reconstruct_the_same_root() {
        let (params, msk, mut rng) = setup(14);
        let tree = parse_policy("or(a, b)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a", "b"]), &mut rng).unwrap();
        let ctx = params.ctx;

        let via_a = reconstruct_root(
            &ck.tree,
            &BTreeMap::from([(0, leaf_decrypt(&ctx, &key, &ck, 0).unwrap())]),
        )
        .unwrap();
        let via_b = reconstruct_root(
            &ck.tree,
            &BTreeMap::from([(1, leaf_decrypt(&ctx, &key, &ck, 1).unwrap())]),
        )
        .unwrap();
        assert_eq!(via_a, via_b);
    }

    #[test]
    fn single_leaf_root_is_the_leaf_value() {
        let (params, msk, mut rng) = setup(15);
        let tree = parse_policy("only").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["only"]), &mut rng).unwrap();
        let leaf = leaf_decrypt(&params.ctx, &key, &ck, 0).unwrap();
        let root = reconstruct_root(&ck.tree, &BTreeMap::from([(0, leaf)])).unwrap();
        assert_eq!(root, leaf);
    }

    #[test]
    fn threshold_gate_reconstruction_matches_harness() {
        // harness knows u and r0 through msk-free identities:
        // M_r must equal e(S1, g^{r0}); we reconstruct g^{r0} from C1 and beta
        let (params, msk, mut rng) = setup(16);
        let tree = parse_policy("2-of(a, b, c)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a", "c"]), &mut rng).unwrap();
        let ctx = params.ctx;

        let m_r = authorize(&ctx, &ck, &key).expect("2 of 3 held");
        let g_r0 = ck.c1.pow(&msk.beta.inverse().unwrap());
        assert_eq!(m_r, ctx.pair(&key.s1, &g_r0));
    }

    #[test]
    fn threshold_not_met_is_unsatisfied() {
        let (params, msk, mut rng) = setup(17);
        let tree = parse_policy("2-of(a, b, c)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["b"]), &mut rng).unwrap();
        assert!(authorize(&params.ctx, &ck, &key).is_none());
        assert!(!verify_authorization(&params.ctx, &ck, &key));
    }

    #[test]
    fn authorization_agrees_with_plaintext_oracle_on_all_subsets() {
        // independent oracle: recursive threshold count
        fn oracle(node: &Node, held: &BTreeSet<String>) -> bool {
            match node {
                Node::Leaf { attribute } => held.contains(attribute),
                Node::Gate {
                    threshold,
                    children,
                } => children.iter().filter(|child| oracle(child, held)).count() >= *threshold,
            }
        }

        let (params, msk, mut rng) = setup(18);
        let tree = parse_policy("2-of(a, b, c)").unwrap();
        let (k, ck) = encapsulate_key(&params, &tree, &mut rng);
        let universe = ["a", "b", "c"];
        for mask in 0u32..8 {
            let held: BTreeSet<String> = universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s.to_string())
                .collect();
            let expected = oracle(tree.root(), &held);
            if held.is_empty() {
                assert!(!expected);
                continue;
            }
            let key = user_keygen(&params, &msk, &held, &mut rng).unwrap();
            assert_eq!(
                verify_authorization(&params.ctx, &ck, &key),
                expected,
                "subset {held:?}"
            );
            if expected {
                let m_r = authorize(&params.ctx, &ck, &key).unwrap();
                assert_eq!(decapsulate_key(&params.ctx, &ck, &key, &m_r), k);
            }
        }
    }

    #[test]
    fn decapsulation_recovers_k_for_distinct_users() {
        let (params, msk, mut rng) = setup(19);
        let tree = parse_policy("and(a, or(b, c))").unwrap();
        let (k, ck) = encapsulate_key(&params, &tree, &mut rng);
        let u1 = user_keygen(&params, &msk, &attrs(&["a", "b"]), &mut rng).unwrap();
        let u2 = user_keygen(&params, &msk, &attrs(&["a", "c"]), &mut rng).unwrap();
        for key in [&u1, &u2] {
            assert!(verify_authorization(&params.ctx, &ck, key));
            let m_r = authorize(&params.ctx, &ck, key).unwrap();
            assert_eq!(decapsulate_key(&params.ctx, &ck, key, &m_r), k);
        }
    }

    #[test]
    fn wrong_root_value_yields_garbage() {
        let (params, msk, mut rng) = setup(20);
        let tree = parse_policy("a").unwrap();
        let (k, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a"]), &mut rng).unwrap();
        let bogus = params.ctx.rand_gt(&mut rng);
        assert_ne!(decapsulate_key(&params.ctx, &ck, &key, &bogus), k);

        // another user's root value carries a different u and does not
        // cancel against this user's S
        let other = user_keygen(&params, &msk, &attrs(&["a"]), &mut rng).unwrap();
        let other_m_r = authorize(&params.ctx, &ck, &other).unwrap();
        assert_ne!(decapsulate_key(&params.ctx, &ck, &key, &other_m_r), k);
    }

    #[test]
    fn colluding_users_cannot_combine_leaf_values() {
        let (params, msk, mut rng) = setup(21);
        let tree = parse_policy("and(a, b)").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let ctx = params.ctx;
        let holder_a = user_keygen(&params, &msk, &attrs(&["a"]), &mut rng).unwrap();
        let holder_b = user_keygen(&params, &msk, &attrs(&["b"]), &mut rng).unwrap();

        let m_a = leaf_decrypt(&ctx, &holder_a, &ck, 0).unwrap();
        let m_b = leaf_decrypt(&ctx, &holder_b, &ck, 1).unwrap();
        let mixed = reconstruct_root(&ck.tree, &BTreeMap::from([(0, m_a), (1, m_b)]))
            .expect("both leaves present");
        assert!(!check_root_equation(&ctx, &ck, &holder_a.s1, &mixed));
        assert!(!check_root_equation(&ctx, &ck, &holder_b.s1, &mixed));
    }

    #[test]
    fn serialization_round_trips() {
        let (params, msk, mut rng) = setup(22);
        let tree = parse_policy("and(a, 2-of(b, c, d))").unwrap();
        let (_, ck) = encapsulate_key(&params, &tree, &mut rng);
        let key = user_keygen(&params, &msk, &attrs(&["a", "b"]), &mut rng).unwrap();

        assert_eq!(
            SystemParams::from_bytes(&params.to_bytes()).unwrap(),
            params
        );
        assert_eq!(MasterSecret::from_bytes(&msk.to_bytes()).unwrap(), msk);
        assert_eq!(UserKey::from_bytes(&key.to_bytes()).unwrap(), key);
        assert_eq!(KeyCiphertext::from_bytes(&ck.to_bytes()).unwrap(), ck);
    }
}
