#pragma once
// Umbrella header.

#include "factcheck/claim_verify.hpp"
#include "factcheck/core.hpp"
#include "factcheck/dataset.hpp"
#include "factcheck/embedding.hpp"
#include "factcheck/evaluation.hpp"
#include "factcheck/nli.hpp"
#include "factcheck/pipeline.hpp"
#include "factcheck/random.hpp"
#include "factcheck/remote.hpp"
#include "factcheck/retrieval.hpp"
#include "factcheck/triple_extract.hpp"
#include "factcheck/triple_verify.hpp"
#include "factcheck/uschema.hpp"
