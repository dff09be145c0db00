#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "certmesh/identity.hpp"
#include "certmesh/routing.hpp"
#include "certmesh/types.hpp"

namespace certmesh {

// Reported to the source of a source-routed packet whose next hop was gone
// at forwarding time.
struct RouteError {
  NodeId reporter;
  NodeId broken_from;
  NodeId broken_to;
  std::uint8_t dropped_kind = 0;
  std::uint32_t dropped_request_id = 0;
  NodeId dropped_destination;
};

// CREQ: flooded request for certificates of the target's public key. Carries
// the requester's own self-signed certificate and the ids of K(origin).
struct CertRequest {
  NodeId origin;
  Certificate origin_cert;  // self-signed
  NodeId target;
  std::vector<NodeId> known_certifiers;
  std::uint32_t request_id = 0;
  std::uint32_t ttl = 0;
  std::vector<NodeId> accumulated_path;  // starts at origin
};

// CREP: certificates for the CREQ's target, signed by the replier. The
// replier's own self-signed certificate rides along so the envelope is always
// verifiable; exchange_offer marks a replier that wants mutual certification
// with the origin.
struct CertReply {
  std::uint32_t request_id = 0;
  NodeId replier;
  std::vector<Certificate> certificates;  // all bind the CREQ's target
  bool exchange_offer = false;
  Certificate replier_cert;  // self-signed
  std::vector<SourceRoute> paths_used;
  Signature signature;
};

// Relay -> target: "origin asked for your key"; secured by the relay's
// signature.
struct TargetNotice {
  std::uint32_t request_id = 0;
  NodeId relay;
  NodeId origin;
  NodeId target;
  Certificate origin_cert;  // origin's self-signed cert from the CREQ
  Certificate relay_cert;   // relay's self-signed cert
  Signature signature;
};

// Target -> relay: request for a certificate of the origin's key.
struct OriginCertRequest {
  std::uint32_t request_id = 0;
  NodeId requester;  // the CREQ target
  NodeId subject;    // the CREQ origin
  Signature signature;
};

// Relay -> target: certificate for the origin's key.
struct OriginCertReply {
  std::uint32_t request_id = 0;
  NodeId relay;
  Certificate cert;
  Signature signature;
};

// First data packet after acceptance: carries the winning certifier list and
// the certificate the origin issued for the target's key.
struct FirstContact {
  NodeId origin;
  NodeId target;
  Certificate origin_cert;  // self-signed
  Certificate target_cert;  // issued by origin over the accepted key
  std::vector<NodeId> certifier_list;
  Signature signature;
};

struct FirstContactAck {
  NodeId origin;  // of the exchange
  NodeId target;
  Certificate origin_cert;  // issued by target over the origin's key
  Signature signature;
};

// Mutual certification with a volunteering replier (exchange_offer).
struct OfferAccept {
  NodeId origin;
  NodeId peer;
  Certificate origin_cert;  // self-signed
  Certificate peer_cert;    // issued by origin over the peer's claimed key
  Signature signature;
};

struct OfferAck {
  NodeId peer;
  NodeId origin;
  Certificate origin_cert;  // issued by peer over the origin's key
  Signature signature;
};

// Periodic implicit-revocation refresh: a fresh certificate for the peer's
// key, plus the sender's current self-signed certificate.
struct RefreshRequest {
  NodeId from;
  NodeId to;
  Certificate peer_cert;  // issued by `from` over `to`'s key
  Certificate from_cert;  // self-signed, current key
  Signature signature;
};

struct RefreshReply {
  NodeId from;
  NodeId to;
  Certificate peer_cert;
  Certificate from_cert;
  Signature signature;
};

using Message =
    std::variant<RouteRequest, RouteReply, RouteError, CertRequest, CertReply, TargetNotice,
                 OriginCertRequest, OriginCertReply, FirstContact, FirstContactAck, OfferAccept,
                 OfferAck, RefreshRequest, RefreshReply>;

std::uint8_t kind_tag(const Message& msg);
const char* kind_name(const Message& msg);
std::optional<std::uint32_t> request_id_of(const Message& msg);

// Canonical byte serialization (fields in declaration order, signature last).
std::vector<std::uint8_t> encode_message(const Message& msg);

// Canonical bytes a message envelope signature covers: the full encoding with
// the signature field left empty.
std::vector<std::uint8_t> signing_payload(const Message& msg);

}  // namespace certmesh
