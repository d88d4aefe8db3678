#pragma once

#include <string>

#include "meanet/sampler.hpp"

namespace meanet {

// Writes chain.jsonl (one retained sample per line, included edges only)
// and chain_meta.json (run metadata, full per-sweep log-likelihood trace)
// into dir, creating it if needed. Timing is deliberately not persisted so
// identical runs produce identical bytes.
void write_chain(const PosteriorChain& chain, const std::string& dir);

// Inverse of write_chain. Weights of excluded edges are not stored on disk
// and come back as zero; sweep_seconds comes back empty.
PosteriorChain read_chain(const std::string& dir);

} // namespace meanet
