#ifndef MCORR_MCORR_HPP
#define MCORR_MCORR_HPP

// Umbrella header for the numerical core. The CLI harness lives in
// mcorr/harness/ and additionally needs OpenSSL.

#include "mcorr/correction/ablation.hpp"
#include "mcorr/correction/attention.hpp"
#include "mcorr/correction/optimizer.hpp"
#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/io.hpp"
#include "mcorr/loss/gradcheck.hpp"
#include "mcorr/loss/total.hpp"
#include "mcorr/loss/tv.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"
#include "mcorr/mask/segmenter.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/metrics/selection.hpp"
#include "mcorr/metrics/ssim.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/patches.hpp"
#include "mcorr/random.hpp"
#include "mcorr/tomo/phantom.hpp"
#include "mcorr/tomo/projector.hpp"
#include "mcorr/tomo/simulate.hpp"
#include "mcorr/tomo/trajectory.hpp"
#include "mcorr/tomo/transform.hpp"

#endif  // MCORR_MCORR_HPP
