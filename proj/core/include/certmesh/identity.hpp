#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "certmesh/bytes.hpp"
#include "certmesh/rng.hpp"
#include "certmesh/types.hpp"

namespace certmesh {

inline constexpr std::size_t kKeyTokenBytes = 32;

// Public keys are opaque fixed-length tokens; equality is byte equality.
struct PublicKey {
  std::array<std::uint8_t, kKeyTokenBytes> token{};
  auto operator<=>(const PublicKey&) const = default;
};

// Secret tokens get their own type so they cannot be handed to any message
// encoder by accident; nothing in the wire layer accepts a SecretKey.
struct SecretKey {
  std::array<std::uint8_t, kKeyTokenBytes> token{};
  auto operator<=>(const SecretKey&) const = default;
};

struct KeyPair {
  PublicKey pub;
  SecretKey sec;
};

using Signature = std::vector<std::uint8_t>;

// Signed binding of a subject to a public key, valid over a half-open window
// [issued_at, issued_at + lifetime).
struct Certificate {
  NodeId subject;
  PublicKey subject_key;
  NodeId issuer;
  Seconds issued_at = 0;
  Seconds lifetime = 0;
  Signature signature;
  bool self_signed = false;
};

// The bytes a certificate signature covers.
std::vector<std::uint8_t> certificate_payload(const Certificate& cert);

void encode_certificate(ByteWriter& w, const Certificate& cert);

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual KeyPair generate(Rng& rng) = 0;
  virtual Signature sign(const KeyPair& keys, std::span<const std::uint8_t> payload) const = 0;
  virtual bool verify(const PublicKey& key, std::span<const std::uint8_t> payload,
                      std::span<const std::uint8_t> sig) const = 0;
};

// Simulation-grade scheme. A private table maps each public token to the
// secret it was generated with; sign produces a keyed digest of
// (secret || payload) and verify recomputes it through the table. Forging a
// signature therefore requires the secret, while fabricating fresh keypairs
// stays possible, which is exactly the threat model the protocol assumes.
// A real asymmetric scheme can be swapped in behind the same interface.
class SimOracleScheme final : public SignatureScheme {
 public:
  KeyPair generate(Rng& rng) override;

  // Registers an externally derived secret (used for reproducible fabricated
  // identities). Returns the keypair owning it.
  KeyPair adopt_secret(const SecretKey& secret);

  Signature sign(const KeyPair& keys, std::span<const std::uint8_t> payload) const override;
  bool verify(const PublicKey& key, std::span<const std::uint8_t> payload,
              std::span<const std::uint8_t> sig) const override;

 private:
  struct TokenHash {
    std::size_t operator()(const PublicKey& k) const noexcept {
      std::size_t h = 0;
      for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
        h = (h << 8) | k.token[i];
      }
      return h;
    }
  };
  std::unordered_map<PublicKey, SecretKey, TokenHash> table_;
};

// Deterministic keypair for (scenario seed, node); generation draws only from
// a stream derived from those two values.
KeyPair generate_keypair(SignatureScheme& scheme, NodeId node, std::uint64_t scenario_seed);

Certificate issue_certificate(const SignatureScheme& scheme, const KeyPair& issuer_keys,
                              NodeId issuer, NodeId subject, const PublicKey& key,
                              Seconds now, Seconds lifetime);

bool validate_certificate(const SignatureScheme& scheme, const Certificate& cert,
                          const PublicKey& issuer_key, Seconds now);

// Shorthand for certificates whose issuer key is carried by the certificate
// itself (issuer == subject).
bool validate_self_signed(const SignatureScheme& scheme, const Certificate& cert, Seconds now);

}  // namespace certmesh

template <>
struct std::hash<certmesh::PublicKey> {
  std::size_t operator()(const certmesh::PublicKey& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto b : k.token) h = (h ^ b) * 1099511628211ull;
    return h;
  }
};
