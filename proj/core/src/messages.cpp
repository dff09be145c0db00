#include "certmesh/messages.hpp"

#include <type_traits>

namespace certmesh {

namespace {

void encode_ids(ByteWriter& w, const std::vector<NodeId>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (NodeId id : ids) w.u32(id.value);
}

void encode_certs(ByteWriter& w, const std::vector<Certificate>& certs) {
  w.u32(static_cast<std::uint32_t>(certs.size()));
  for (const auto& c : certs) encode_certificate(w, c);
}

void encode_routes(ByteWriter& w, const std::vector<SourceRoute>& routes) {
  w.u32(static_cast<std::uint32_t>(routes.size()));
  for (const auto& r : routes) encode_ids(w, r.hops());
}

void encode_body(ByteWriter& w, const RouteRequest& m) {
  w.u32(m.origin.value);
  w.u32(m.target.value);
  w.u32(m.request_id);
  encode_ids(w, m.accumulated_hops);
  w.u32(m.ttl);
}

void encode_body(ByteWriter& w, const RouteReply& m) {
  w.u32(m.origin.value);
  w.u32(m.target.value);
  w.u32(m.request_id);
  encode_ids(w, m.route.hops());
}

void encode_body(ByteWriter& w, const RouteError& m) {
  w.u32(m.reporter.value);
  w.u32(m.broken_from.value);
  w.u32(m.broken_to.value);
  w.u8(m.dropped_kind);
  w.u32(m.dropped_request_id);
  w.u32(m.dropped_destination.value);
}

void encode_body(ByteWriter& w, const CertRequest& m) {
  w.u32(m.origin.value);
  encode_certificate(w, m.origin_cert);
  w.u32(m.target.value);
  encode_ids(w, m.known_certifiers);
  w.u32(m.request_id);
  w.u32(m.ttl);
  encode_ids(w, m.accumulated_path);
}

void encode_body(ByteWriter& w, const CertReply& m) {
  w.u32(m.request_id);
  w.u32(m.replier.value);
  encode_certs(w, m.certificates);
  w.u8(m.exchange_offer ? 1 : 0);
  encode_certificate(w, m.replier_cert);
  encode_routes(w, m.paths_used);
}

void encode_body(ByteWriter& w, const TargetNotice& m) {
  w.u32(m.request_id);
  w.u32(m.relay.value);
  w.u32(m.origin.value);
  w.u32(m.target.value);
  encode_certificate(w, m.origin_cert);
  encode_certificate(w, m.relay_cert);
}

void encode_body(ByteWriter& w, const OriginCertRequest& m) {
  w.u32(m.request_id);
  w.u32(m.requester.value);
  w.u32(m.subject.value);
}

void encode_body(ByteWriter& w, const OriginCertReply& m) {
  w.u32(m.request_id);
  w.u32(m.relay.value);
  encode_certificate(w, m.cert);
}

void encode_body(ByteWriter& w, const FirstContact& m) {
  w.u32(m.origin.value);
  w.u32(m.target.value);
  encode_certificate(w, m.origin_cert);
  encode_certificate(w, m.target_cert);
  encode_ids(w, m.certifier_list);
}

void encode_body(ByteWriter& w, const FirstContactAck& m) {
  w.u32(m.origin.value);
  w.u32(m.target.value);
  encode_certificate(w, m.origin_cert);
}

void encode_body(ByteWriter& w, const OfferAccept& m) {
  w.u32(m.origin.value);
  w.u32(m.peer.value);
  encode_certificate(w, m.origin_cert);
  encode_certificate(w, m.peer_cert);
}

void encode_body(ByteWriter& w, const OfferAck& m) {
  w.u32(m.peer.value);
  w.u32(m.origin.value);
  encode_certificate(w, m.origin_cert);
}

void encode_body(ByteWriter& w, const RefreshRequest& m) {
  w.u32(m.from.value);
  w.u32(m.to.value);
  encode_certificate(w, m.peer_cert);
  encode_certificate(w, m.from_cert);
}

void encode_body(ByteWriter& w, const RefreshReply& m) {
  w.u32(m.from.value);
  w.u32(m.to.value);
  encode_certificate(w, m.peer_cert);
  encode_certificate(w, m.from_cert);
}

template <class T>
constexpr bool kHasSignature = requires(const T& t) { t.signature; };

std::vector<std::uint8_t> encode_impl(const Message& msg, bool include_sig) {
  ByteWriter w;
  w.u8(kind_tag(msg));
  std::visit(
      [&](const auto& m) {
        encode_body(w, m);
        using T = std::decay_t<decltype(m)>;
        if constexpr (kHasSignature<T>) {
          if (include_sig) {
            w.blob(m.signature);
          } else {
            w.u32(0);
          }
        }
      },
      msg);
  return w.take();
}

}  // namespace

std::uint8_t kind_tag(const Message& msg) { return static_cast<std::uint8_t>(msg.index()); }

const char* kind_name(const Message& msg) {
  static constexpr const char* names[] = {
      "RREQ", "RREP", "RERR",  "CREQ",      "CREP",      "NOTICE",  "OCREQ",
      "OCREP", "CONTACT", "CONTACT_ACK", "OFFER_ACC", "OFFER_ACK", "REFRESH", "REFRESH_ACK"};
  return names[msg.index()];
}

std::optional<std::uint32_t> request_id_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::optional<std::uint32_t> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (requires { m.request_id; }) {
          return m.request_id;
        } else if constexpr (std::is_same_v<T, RouteError>) {
          return m.dropped_request_id;
        } else {
          return std::nullopt;
        }
      },
      msg);
}

std::vector<std::uint8_t> encode_message(const Message& msg) { return encode_impl(msg, true); }

std::vector<std::uint8_t> signing_payload(const Message& msg) { return encode_impl(msg, false); }

}  // namespace certmesh
