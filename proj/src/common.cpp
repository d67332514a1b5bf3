#include <atomic>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "hspw/error.hpp"
#include "hspw/numerics.hpp"
#include "hspw/parallel.hpp"

namespace hspw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnboundedIntegrand: return "UnboundedIntegrand";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SupportEscapesDomain: return "SupportEscapesDomain";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::GlsDivergent: return "GlsDivergent";
    case ErrorCode::InvalidGeneratingFunction: return "InvalidGeneratingFunction";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InfeasibleFamily: return "InfeasibleFamily";
    case ErrorCode::NonpositiveLambda: return "NonpositiveLambda";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const GaussLegendreRule<double>& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule<double>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendreRule<double>>(compute_gauss_legendre<double>(order));
  return *slot;
}

int thread_limit() {
  if (const char* env = std::getenv("HSPW_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {
thread_local bool t_inside_parallel = false;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_limit()), count);
  if (workers <= 1 || t_inside_parallel) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    t_inside_parallel = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        // Keep the lowest failing index so the surfaced error is stable.
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
    t_inside_parallel = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hspw
