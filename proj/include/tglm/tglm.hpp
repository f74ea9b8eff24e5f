#pragma once

#include "tglm/bench.hpp"
#include "tglm/einsum.hpp"
#include "tglm/epsilon.hpp"
#include "tglm/error.hpp"
#include "tglm/glm.hpp"
#include "tglm/hypothesis.hpp"
#include "tglm/io.hpp"
#include "tglm/levi_civita.hpp"
#include "tglm/model.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/pipeline.hpp"
#include "tglm/staggered.hpp"
#include "tglm/tensor.hpp"
