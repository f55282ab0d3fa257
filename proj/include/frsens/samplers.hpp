#pragma once

#include <variant>

#include "frsens/ccv.hpp"
#include "frsens/dataset.hpp"
#include "frsens/dcv.hpp"
#include "frsens/dp.hpp"
#include "frsens/dpgmm.hpp"
#include "frsens/grid.hpp"
#include "frsens/models.hpp"

namespace frsens {

/// Runs the sampler matching the alternative held by `cfg`.
inline PosteriorSample sample_posterior(const Dataset& data, const ModelConfig& cfg,
                                        const McmcControl& ctl, const Grid& grid = Grid{}) {
  struct Visitor {
    const Dataset& data;
    const McmcControl& ctl;
    const Grid& grid;
    PosteriorSample operator()(const DpConfig& c) const { return dp_posterior(data, c, ctl, grid); }
    PosteriorSample operator()(const DpgmmConfig& c) const {
      return dpgmm_posterior(data, c, ctl, grid);
    }
    PosteriorSample operator()(const CcvConfig& c) const {
      return ccv_posterior(data, c, ctl, grid);
    }
    PosteriorSample operator()(const DcvConfig& c) const {
      return dcv_posterior(data, c, ctl, grid);
    }
  };
  return std::visit(Visitor{data, ctl, grid}, cfg);
}

}  // namespace frsens
