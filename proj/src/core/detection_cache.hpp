#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "huntforge/hunt.hpp"

namespace huntforge {

/// Detector output per (detector, corpus, record count). Corpora only grow, so
/// a record count identifies the prefix a detector saw.
class DetectionCache {
public:
    std::vector<Hypothesis> detect(const DetectorSpec& spec,
                                   const std::shared_ptr<const telemetry::TelemetryCorpus>& corpus);

private:
    using Key = std::tuple<std::string, const void*, std::size_t>;
    std::mutex mu_;
    struct Entry {
        std::shared_ptr<const telemetry::TelemetryCorpus> pin;  // keeps the address in the key unique
        std::vector<Hypothesis> found;
    };
    std::map<Key, Entry> entries_;
};

}  // namespace huntforge
