#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "vcsim/security.hpp"

using namespace vcsim;

namespace {

std::string sequence(int alpha, int beta, int n, SenderSchedule s = {}) {
  std::string out;
  for (int i = 0; i < n; ++i) out += next_kind(s, alpha, beta) == PacketKind::Long ? 'L' : 'S';
  return out;
}

SecurityProfile profile(Scheme scheme, int alpha, int beta = 0) {
  SecurityProfile p;
  p.scheme = scheme;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

PacketMeta packet(PacketKind kind, std::uint64_t pseudonym) {
  PacketMeta p;
  p.kind = kind;
  p.pseudonym_id = pseudonym;
  return p;
}

}  // namespace

TEST(NextKind, CertificatePeriod) {
  EXPECT_EQ(sequence(5, 0, 12), "LSSSSLSSSSLS");
  EXPECT_EQ(sequence(1, 0, 6), "LLLLLL");
  EXPECT_EQ(sequence(1, 7, 20), std::string(20, 'L'));
}

TEST(NextKind, PushAfterPseudonymChange) {
  const auto seq = sequence(50, 5, 106);
  EXPECT_EQ(seq.substr(0, 5), "LLLLL");
  EXPECT_EQ(seq.substr(5, 49), std::string(49, 'S'));
  EXPECT_EQ(seq[54], 'L');
  EXPECT_EQ(seq.substr(55, 49), std::string(49, 'S'));
  EXPECT_EQ(seq[104], 'L');
}

TEST(NextKind, LongFractionIsOneOverAlpha) {
  for (int alpha : {1, 2, 5, 10, 15, 30, 50}) {
    const int n = 600;  // one lifetime at 10 Hz
    const auto seq = sequence(alpha, 0, n);
    const auto longs = std::count(seq.begin(), seq.end(), 'L');
    EXPECT_EQ(longs, (n + alpha - 1) / alpha) << "alpha " << alpha;
  }
}

TEST(PacketSize, PublishedAverages) {
  // payload + (long + (alpha - 1) * short) / alpha.
  auto oracle = [](int long_bytes, int alpha) {
    return 200.0 + (long_bytes + (alpha - 1) * 48.0) / alpha;
  };
  const int alphas[] = {1, 5, 10, 15, 30, 50};
  const int bp[] = {341, 266, 257, 254, 251, 250};
  const int hybrid[] = {502, 299, 273, 265, 257, 253};
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(avg_packet_size(profile(Scheme::BP, alphas[i])), bp[i], 1) << alphas[i];
    EXPECT_NEAR(avg_packet_size(profile(Scheme::Hybrid, alphas[i])), hybrid[i], 1) << alphas[i];
    EXPECT_DOUBLE_EQ(mean_packet_size(profile(Scheme::BP, alphas[i])), oracle(141, alphas[i]));
    EXPECT_DOUBLE_EQ(mean_packet_size(profile(Scheme::Hybrid, alphas[i])), oracle(302, alphas[i]));
  }
  EXPECT_EQ(avg_packet_size(profile(Scheme::BP, 1)), 341);
  EXPECT_EQ(avg_packet_size(profile(Scheme::BP, 10)), 257);
  EXPECT_EQ(avg_packet_size(profile(Scheme::Hybrid, 5)), 299);
  EXPECT_EQ(avg_packet_size(profile(Scheme::Hybrid, 50)), 253);
  EXPECT_EQ(avg_packet_size(profile(Scheme::NoSecurity, 17)), 200);
}

TEST(PacketSize, PerKind) {
  const auto bp = profile(Scheme::BP, 1);
  EXPECT_EQ(bp.packet_size(PacketKind::Long), 341);
  EXPECT_EQ(bp.packet_size(PacketKind::Short), 248);
  EXPECT_EQ(profile(Scheme::Hybrid, 1).packet_size(PacketKind::Long), 502);
  EXPECT_EQ(profile(Scheme::NoSecurity, 1).packet_size(PacketKind::Plain), 200);
}

TEST(Capacity, VerificationsPerSlot) {
  EXPECT_NEAR(max_packets_per_slot(7.2, 10.0), 13.9, 0.05);
  EXPECT_NEAR(max_packets_per_slot(52.3, 10.0), 1.9, 0.05);
  EXPECT_NEAR(max_packets_per_slot(3.0, 10.0), 33.3, 0.05);
}

TEST(Capacity, SlotFeasibility) {
  EXPECT_TRUE(slot_feasibility({}, 10.0));
  std::vector<double> costs(33, 3.0);
  EXPECT_TRUE(slot_feasibility(costs, 10.0));
  costs.push_back(3.0);
  EXPECT_FALSE(slot_feasibility(costs, 10.0));
  const std::vector<double> exact{50.0, 50.0};
  EXPECT_FALSE(slot_feasibility(exact, 10.0));
}

TEST(Budget, AdmitsInArrivalOrderPerSlot) {
  SlotBudget b(10.0);
  EXPECT_TRUE(b.admit(4, 3.0));
  EXPECT_TRUE(b.admit(4, 7.0));
  EXPECT_FALSE(b.admit(4, 0.5));
  EXPECT_TRUE(b.admit(5, 9.0));
  EXPECT_DOUBLE_EQ(b.busy_ms(), 9.0);
  SlotBudget unlimited;
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(unlimited.admit(1, 55.0));
}

TEST(Pseudonym, ChangesAtPhasePlusMultiplesOfLifetime) {
  PseudonymWallet w(3, from_seconds(17.3), from_seconds(60.0));
  std::vector<double> changes;
  for (SimTime t = SimTime::zero(); t < from_seconds(200.0); t += from_millis(100.0)) {
    if (w.refresh(t)) changes.push_back(to_seconds(w.current().activated_at));
  }
  ASSERT_EQ(changes.size(), 4u);
  EXPECT_NEAR(changes[0], 17.3, 1e-9);
  EXPECT_NEAR(changes[1], 77.3, 1e-9);
  EXPECT_NEAR(changes[2], 137.3, 1e-9);
  EXPECT_NEAR(changes[3], 197.3, 1e-9);
}

TEST(Pseudonym, IdsNeverRepeat) {
  std::set<std::uint64_t> ids;
  for (VehicleId v = 0; v < 50; ++v) {
    PseudonymWallet w(v, from_seconds(v * 0.7), from_seconds(1.0));
    ids.insert(w.current().id);
    for (int k = 1; k <= 40; ++k) {
      w.refresh(from_seconds(v * 0.7 + k));
      ids.insert(w.current().id);
    }
  }
  EXPECT_EQ(ids.size(), 50u * 41u);
}

TEST(Pseudonym, ObserverSeesTwoOrThreeIdsIn120s) {
  for (double phase = 0.0; phase < 60.0; phase += 2.9) {
    PseudonymWallet w(1, from_seconds(phase), from_seconds(60.0));
    std::set<std::uint64_t> seen;
    const SimTime start = from_seconds(500.0);
    for (SimTime t = start; t < start + from_seconds(120.0); t += from_millis(100.0)) {
      w.refresh(t);
      seen.insert(w.current().id);
    }
    EXPECT_GE(seen.size(), 2u);
    EXPECT_LE(seen.size(), 3u);
  }
}

TEST(Pseudonym, UniformPhasesSpreadChanges) {
  // 100 vehicles with phases drawn uniformly: changes per 100 ms slot
  // average 100 / 600.
  const int fleet = 100;
  std::vector<PseudonymWallet> wallets;
  for (int i = 0; i < fleet; ++i) wallets.emplace_back(i, from_seconds(60.0 * (i + 0.5) / fleet), from_seconds(60.0));
  int changes = 0;
  int slots = 0;
  int worst = 0;
  for (SimTime t{}; t < from_seconds(120.0); t += from_millis(100.0)) {
    int here = 0;
    for (auto& w : wallets) here += w.refresh(t) ? 1 : 0;
    changes += here;
    worst = std::max(worst, here);
    ++slots;
  }
  EXPECT_NEAR(static_cast<double>(changes) / slots, 100.0 / 600.0, 0.01);
  EXPECT_LE(worst, 1);
}

TEST(MakePacket, RotationResetsSchedule) {
  SenderState s;
  s.wallet = PseudonymWallet(0, from_seconds(1.0), from_seconds(60.0));
  const auto p = profile(Scheme::BP, 5, 2);
  std::string kinds;
  for (int i = 0; i < 14; ++i) {
    const auto m = make_packet(s, p, PayloadClass::Beacon, 0.0, 1, false, from_millis(100.0 * i));
    kinds += m.kind == PacketKind::Long ? 'L' : 'S';
    EXPECT_EQ(m.size_bytes, p.packet_size(m.kind));
    EXPECT_EQ(m.seq, static_cast<std::uint64_t>(i));
  }
  // t = 0.0..0.9 s under the initial pseudonym, then a change at 1.0 s.
  EXPECT_EQ(kinds, "LLSSSSLSSSLLSS");
  EXPECT_EQ(s.longs_emitted + s.shorts_emitted, 14u);
}

TEST(MakePacket, NoSecurityIsPlain) {
  SenderState s;
  const auto m = make_packet(s, profile(Scheme::NoSecurity, 1), PayloadClass::Warning, 3.0, -1, true,
                             SimTime::zero());
  EXPECT_EQ(m.kind, PacketKind::Plain);
  EXPECT_EQ(m.size_bytes, 200);
  EXPECT_EQ(m.payload, PayloadClass::Warning);
  EXPECT_TRUE(m.sender_braking);
}

TEST(ReceiverDecide, HybridCosts) {
  ValidationCache cache;
  const auto p = profile(Scheme::Hybrid, 10);
  auto r = receiver_decide(packet(PacketKind::Long, 7), cache, p);
  EXPECT_EQ(r.decision, Decision::ValidateLongAndProcess);
  EXPECT_DOUBLE_EQ(r.cost_ms, 52.3 + 3.0);
  r = receiver_decide(packet(PacketKind::Long, 7), cache, p);
  EXPECT_EQ(r.decision, Decision::SkipCachedLong);
  EXPECT_DOUBLE_EQ(r.cost_ms, 3.0);
  r = receiver_decide(packet(PacketKind::Short, 7), cache, p);
  EXPECT_EQ(r.decision, Decision::ProcessShort);
  EXPECT_DOUBLE_EQ(r.cost_ms, 3.0);
  r = receiver_decide(packet(PacketKind::Short, 8), cache, p);
  EXPECT_EQ(r.decision, Decision::DropUnvalidatedShort);
  EXPECT_DOUBLE_EQ(r.cost_ms, 0.0);
  EXPECT_FALSE(r.delivers());
  EXPECT_EQ(cache.size(), 1u);
}

TEST(ReceiverDecide, CertificateOnlyCosting) {
  ValidationCache cache;
  auto p = profile(Scheme::BP, 10);
  p.long_cost = LongCostModel::CertificateOnly;
  EXPECT_DOUBLE_EQ(receiver_decide(packet(PacketKind::Long, 1), cache, p).cost_ms, 7.2);
}

TEST(ReceiverDecide, PreviewLeavesCacheUntouched) {
  ValidationCache cache;
  const auto p = profile(Scheme::BP, 10);
  EXPECT_EQ(preview_decision(packet(PacketKind::Long, 3), cache, p).decision, Decision::ValidateLongAndProcess);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(ReceiverDecide, CacheAtMostOncePerPseudonym) {
  // Property: across an arbitrary arrival order, each pseudonym is
  // validated exactly once and never again.
  ValidationCache cache;
  const auto p = profile(Scheme::Hybrid, 5);
  std::vector<int> validations(20, 0);
  std::uint64_t x = 12345;
  for (int i = 0; i < 5000; ++i) {
    x = x * 6364136223846793005ULL + 1442695040888963407ULL;
    const auto id = (x >> 33) % 20;
    const auto kind = ((x >> 20) & 3) == 0 ? PacketKind::Long : PacketKind::Short;
    const bool known = cache.contains(id);
    const auto r = receiver_decide(packet(kind, id), cache, p);
    if (r.decision == Decision::ValidateLongAndProcess) {
      EXPECT_FALSE(known);
      ++validations[id];
    }
    if (kind == PacketKind::Short) EXPECT_EQ(r.delivers(), known);
  }
  for (int v : validations) EXPECT_LE(v, 1);
}

TEST(ReceiverDecide, NoSecurityPlain) {
  ValidationCache cache;
  const auto r = receiver_decide(packet(PacketKind::Plain, 1), cache, profile(Scheme::NoSecurity, 1));
  EXPECT_EQ(r.decision, Decision::ProcessPlain);
  EXPECT_EQ(r.cost_ms, 0.0);
  EXPECT_TRUE(r.delivers());
}
