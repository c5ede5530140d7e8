#pragma once

#include "ecomlm/lm.hpp"

namespace ecomlm::lm {

// Completion-endpoint client. Scoring POSTs the concatenated text with
// echo+logprobs and recovers the continuation region from the provider's
// per-token character offsets; provider token counts are trusted as-is.
std::shared_ptr<LmBackend> make_remote(const BackendDescriptor& d);

// Remote/mock-uniform/mock-hash from a descriptor. The oracle backend needs
// gold data and is constructed explicitly instead.
std::shared_ptr<LmBackend> make_backend(const BackendDescriptor& d);

} // namespace ecomlm::lm
