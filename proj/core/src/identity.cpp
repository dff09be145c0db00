#include "certmesh/identity.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace certmesh {

namespace {

std::array<std::uint8_t, kKeyTokenBytes> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, kKeyTokenBytes> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

PublicKey public_from_secret(const SecretKey& secret) {
  std::vector<std::uint8_t> buf{'p', 'k', ':'};
  buf.insert(buf.end(), secret.token.begin(), secret.token.end());
  return PublicKey{sha256(buf)};
}

}  // namespace

std::vector<std::uint8_t> certificate_payload(const Certificate& cert) {
  ByteWriter w;
  w.u32(cert.subject.value);
  w.raw(cert.subject_key.token);
  w.f64(cert.issued_at);
  w.f64(cert.lifetime);
  return w.take();
}

void encode_certificate(ByteWriter& w, const Certificate& cert) {
  w.u32(cert.subject.value);
  w.raw(cert.subject_key.token);
  w.u32(cert.issuer.value);
  w.f64(cert.issued_at);
  w.f64(cert.lifetime);
  w.blob(cert.signature);
  w.u8(cert.self_signed ? 1 : 0);
}

KeyPair SimOracleScheme::generate(Rng& rng) {
  SecretKey secret;
  auto raw = rng.bytes(kKeyTokenBytes);
  std::copy(raw.begin(), raw.end(), secret.token.begin());
  return adopt_secret(secret);
}

KeyPair SimOracleScheme::adopt_secret(const SecretKey& secret) {
  KeyPair kp{public_from_secret(secret), secret};
  table_.emplace(kp.pub, kp.sec);
  return kp;
}

Signature SimOracleScheme::sign(const KeyPair& keys, std::span<const std::uint8_t> payload) const {
  std::vector<std::uint8_t> buf;
  buf.reserve(keys.sec.token.size() + payload.size());
  buf.insert(buf.end(), keys.sec.token.begin(), keys.sec.token.end());
  buf.insert(buf.end(), payload.begin(), payload.end());
  auto d = sha256(buf);
  return Signature(d.begin(), d.end());
}

bool SimOracleScheme::verify(const PublicKey& key, std::span<const std::uint8_t> payload,
                             std::span<const std::uint8_t> sig) const {
  auto it = table_.find(key);
  if (it == table_.end()) return false;
  KeyPair kp{key, it->second};
  Signature expect = sign(kp, payload);
  return expect.size() == sig.size() &&
         std::equal(expect.begin(), expect.end(), sig.begin());
}

KeyPair generate_keypair(SignatureScheme& scheme, NodeId node, std::uint64_t scenario_seed) {
  Rng stream(derive_seed(scenario_seed, 0x6b657970ull /*"keyp"*/, node.value));
  return scheme.generate(stream);
}

Certificate issue_certificate(const SignatureScheme& scheme, const KeyPair& issuer_keys,
                              NodeId issuer, NodeId subject, const PublicKey& key,
                              Seconds now, Seconds lifetime) {
  if (!(lifetime > 0)) {
    throw std::invalid_argument("certificate lifetime must be positive");
  }
  Certificate cert;
  cert.subject = subject;
  cert.subject_key = key;
  cert.issuer = issuer;
  cert.issued_at = now;
  cert.lifetime = lifetime;
  cert.self_signed = (issuer == subject);
  cert.signature = scheme.sign(issuer_keys, certificate_payload(cert));
  return cert;
}

bool validate_certificate(const SignatureScheme& scheme, const Certificate& cert,
                          const PublicKey& issuer_key, Seconds now) {
  if (cert.self_signed != (cert.issuer == cert.subject)) return false;
  if (!(cert.lifetime > 0)) return false;
  if (now < cert.issued_at || now >= cert.issued_at + cert.lifetime) return false;
  return scheme.verify(issuer_key, certificate_payload(cert), cert.signature);
}

bool validate_self_signed(const SignatureScheme& scheme, const Certificate& cert, Seconds now) {
  return cert.issuer == cert.subject &&
         validate_certificate(scheme, cert, cert.subject_key, now);
}

}  // namespace certmesh
