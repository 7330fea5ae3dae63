#pragma once

#include <span>
#include <vector>

#include "huntforge/hypothesis.hpp"
#include "huntforge/knowledge.hpp"
#include "huntforge/telemetry.hpp"

namespace huntforge::reasoning {

/// Expands a beacon detection into threat hypotheses: `cec(remote)` always, at
/// `unmatched_factor` times the detection confidence when no C&C indicator
/// matches; `infected(client, m)` for every known malware m once the remote is
/// matched C&C infrastructure.
std::vector<Hypothesis> kge_expand(const Hypothesis& detection, const KnowledgeBase& k,
                                   double unmatched_factor = 0.5);

/// Lateral spread of an accepted `infected(c, m)` fact: one `infected(h, m)`
/// per inventoried host h whose syslog records peer access from c. Hosts that
/// are already known infected are skipped. Result is in natural host order.
/// Throws HuntError(not_applicable) when the fact is not in knowledge.
std::vector<Hypothesis> impact_assess(const Predicate& fact, const KnowledgeBase& k,
                                      std::span<const telemetry::SyslogEvent> syslog,
                                      double confidence = 0.5);

/// Accepted iff the `cec(x)` indicator is a known C&C host.
Verdict verify_analytics(const Hypothesis& h, const KnowledgeBase& k);

/// Accepted iff the host inventory holds an artifact with the malware's intel hash.
/// Throws HuntError(unavailable) when no inventory was collected for the host.
Verdict verify_forensics(const Hypothesis& h, const telemetry::ForensicInventorySet& inventories,
                         const KnowledgeBase& k);

/// Orders host names with embedded numbers numerically: client2 < client10.
bool natural_less(std::string_view a, std::string_view b);

}  // namespace huntforge::reasoning
