#pragma once

#include <cstdint>

// Sizes, schedules and tolerances of the acceptance suite. Values marked
// "pilot" were measured with seeds disjoint from kAcceptanceSeed and then
// fixed here.

namespace srrw::thresholds {

inline constexpr std::uint64_t kAcceptanceSeed = 20240601;

// Second-moment oracle
inline constexpr std::uint64_t kMomentReplicas = 100000;
inline constexpr std::uint64_t kMomentHorizon = 1000;
inline constexpr double kMomentMaxZ = 4.0;

// Construction equivalence
inline constexpr int kEquivalenceMaxN = 6;
inline constexpr double kEquivalenceAtomTol = 1e-12;
inline constexpr std::uint64_t kEquivalenceLargeN = 1000;
inline constexpr std::uint64_t kEquivalenceSamples = 100000;
inline constexpr double kEquivalenceSignificance = 0.001;

// Phase diagram
inline constexpr std::uint64_t kPhaseHorizon = 1000000;
inline constexpr std::uint64_t kPhaseReplicas = 200;
inline constexpr double kPhaseTolerance = 0.05;

// Recurrence split: returns to B(0, 1) counted at 10^4 and 10^6.
inline constexpr std::uint64_t kReturnReplicas = 200;
inline constexpr std::uint64_t kReturnEarly = 10000;
inline constexpr std::uint64_t kReturnLate = 1000000;
inline constexpr double kReturnFraction = 0.9;

// Superdiffusive limit: S_n / n^alpha at 10^2, 10^3, ..., 10^6.
inline constexpr std::uint64_t kLimitReplicas = 500;
inline constexpr std::uint64_t kLimitHorizon = 1000000;
inline constexpr std::uint64_t kLimitFirstCheckpoint = 100;
/// Pilot seeds 1001, 1002, 1003: the 1st percentile of |S_n / n^0.75| at
/// 10^6 was 0.2482, 0.1924 and 0.2565; the floor is half the smallest.
inline constexpr double kLimitFloor = 0.096;

// Angular transition: last four checkpoints of the default 64 * 2^k schedule.
inline constexpr std::uint64_t kAngularReplicas = 200;
inline constexpr std::uint64_t kAngularHorizon = 1000000;
inline constexpr double kAngularConvergedMax = 0.05;
inline constexpr double kAngularOscillatingMin = 0.5;

// Marcinkiewicz-Zygmund rate: n^nu |Delta_n(id)| at 10^3, ..., 10^6.
inline constexpr std::uint64_t kRateReplicas = 200;
inline constexpr double kRateNu = 0.2;
inline constexpr double kRateMinDrop = 2.0;

// beta_n n^(1 - alpha) against 1 / Gamma(1 + alpha)
inline constexpr std::uint64_t kBetaHorizon = 1000000;
inline constexpr double kBetaTolerance = 1e-3;

// Pathwise identity for Delta_n
inline constexpr std::uint64_t kIdentityHorizon = 100000;
inline constexpr double kIdentityTolerance = 1e-8;

// Lyapunov certification
inline constexpr std::uint64_t kLyapunovSamples = 1000000;

// Exit times
inline constexpr std::uint64_t kExitReplicas = 1000;
inline constexpr double kExitMaxRatio = 3.0;

// Critical planar rate
inline constexpr std::uint64_t kCriticalReplicas = 200;
inline constexpr std::uint64_t kCriticalHorizon = 1000000;
inline constexpr double kCriticalKappa = 0.9;
inline constexpr double kCriticalTolerance = 0.1;

}  // namespace srrw::thresholds
