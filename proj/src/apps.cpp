#include "aos/apps.hpp"

#include <array>
#include <chrono>

namespace aos::apps {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

template <typename E, std::size_t N>
std::optional<E> parse_named(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& names) {
  for (const auto& [e, n] : names) {
    if (n == s) return e;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E e, const std::array<std::pair<E, std::string_view>, N>& names) {
  for (const auto& [v, n] : names) {
    if (v == e) return n;
  }
  return "?";
}

constexpr std::array<std::pair<App, std::string_view>, 4> kApps{{
    {App::kHistogram, "histogram"}, {App::kKMeans, "kmeans"},
    {App::kMatAdd, "matadd"}, {App::kMatMul, "matmul"}}};
constexpr std::array<std::pair<Mode, std::string_view>, 2> kModes{{
    {Mode::kActive, "active"}, {Mode::kPassive, "passive"}}};
constexpr std::array<std::pair<ResultMode, std::string_view>, 4> kResults{{
    {ResultMode::kValue, "value"}, {ResultMode::kVolatile, "volatile"},
    {ResultMode::kStore, "store"}, {ResultMode::kInPlaceFma, "inplace_fma"}}};
constexpr std::array<std::pair<DatasetSize, std::string_view>, 3> kDatasets{{
    {DatasetSize::kDesk, "desk"}, {DatasetSize::kSmall, "small"}, {DatasetSize::kBig, "big"}}};
constexpr std::array<std::pair<ObjectSize, std::string_view>, 2> kObjects{{
    {ObjectSize::kBig, "big"}, {ObjectSize::kSmall, "small"}}};

constexpr const char* kArrayClass = "FloatArray";
constexpr const char* kPointsClass = "Points";
constexpr const char* kMatrixClass = "Matrix";

bool is_matrix(App a) { return a == App::kMatAdd || a == App::kMatMul; }

void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

void ignore_existing(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAlreadyExists) throw;
  }
}

ResultPlacement placement_for(const AppParams& p) {
  switch (p.result) {
    case ResultMode::kVolatile: return ResultPlacement::volatile_dram();
    case ResultMode::kStore: return ResultPlacement::store_in(p.tier);
    default: return ResultPlacement::by_value();
  }
}

// Tracks client-side kernel time in passive mode.
class MethodTimer {
 public:
  explicit MethodTimer(AppOutcome& out) : out_(out), t0_(Clock::now()) {}
  ~MethodTimer() { out_.client_method_ns += since(t0_); }

 private:
  AppOutcome& out_;
  Clock::time_point t0_;
};

void run_histogram(const AppParams& p, Session& s, AppOutcome& out) {
  std::uint64_t blocks = p.input_objects();
  std::vector<std::uint64_t> block_bytes;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    auto t0 = Clock::now();
    BlockPayload block = kernels::gen_f_block(p.seed, p.hist_elements, kernels::kFDistD1,
                                              kernels::kFDistD2, p.hist_block_elems, b);
    out.generate_ns += since(t0);
    t0 = Clock::now();
    out.input_ids.push_back(s.make_persistent(kArrayClass, block, p.tier));
    out.persist_ns += since(t0);
    block_bytes.push_back(payload_size_bytes(block));
    out.dataset_bytes += block_bytes.back();
  }

  if (p.on_compute_begin) p.on_compute_begin();
  auto w0 = s.counters().wire;
  auto t0 = Clock::now();
  std::vector<BlockPayload> parts;
  parts.reserve(blocks);
  for (std::size_t b = 0; b < out.input_ids.size(); ++b) {
    const ObjectId& id = out.input_ids[b];
    if (p.mode == Mode::kActive) {
      parts.push_back(std::get<BlockPayload>(s.invoke(id, "histogram")));
    } else {
      BlockPayload block = s.fetch_full(id);
      MethodTimer timer(out);
      parts.push_back(kernels::histogram_block(block.values, kernels::HistogramSpec::standard()));
    }
    out.method_input_bytes += block_bytes[b];
    ++out.method_calls;
  }
  out.summary = kernels::merge_histograms(parts);
  out.compute_ns = since(t0);
  out.compute_wire = s.counters().wire - w0;
  out.output_bytes = payload_size_bytes(out.summary);
}

void run_kmeans(const AppParams& p, Session& s, AppOutcome& out) {
  std::uint64_t blocks = p.input_objects();
  std::vector<std::uint64_t> block_bytes;
  std::vector<BlockPayload> head;  // leading blocks that seed the centroids
  std::uint64_t head_rows = 0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    auto t0 = Clock::now();
    BlockPayload block =
        kernels::gen_points_block(p.seed, p.km_points, p.km.dims, p.km_block_rows, b);
    out.generate_ns += since(t0);
    t0 = Clock::now();
    out.input_ids.push_back(s.make_persistent(kPointsClass, block, p.tier));
    out.persist_ns += since(t0);
    block_bytes.push_back(payload_size_bytes(block));
    out.dataset_bytes += block_bytes.back();
    if (head_rows < p.km.centers) {
      head_rows += block.rows;
      head.push_back(std::move(block));
    }
  }
  BlockPayload centroids = kernels::initial_centroids(head, p.km.centers);
  head.clear();

  if (p.on_compute_begin) p.on_compute_begin();
  auto w0 = s.counters().wire;
  auto t0 = Clock::now();
  for (std::uint64_t it = 0; it < p.km.iterations; ++it) {
    std::vector<BlockPayload> partials;
    partials.reserve(blocks);
    for (std::size_t b = 0; b < out.input_ids.size(); ++b) {
      const ObjectId& id = out.input_ids[b];
      if (p.mode == Mode::kActive) {
        std::array<InvokeArg, 1> args{centroids};
        partials.push_back(std::get<BlockPayload>(s.invoke(id, "partial", args)));
      } else {
        BlockPayload block = s.fetch_full(id);
        MethodTimer timer(out);
        partials.push_back(
            kernels::kmeans_partial(PayloadView::of(block), PayloadView::of(centroids)));
      }
      out.method_input_bytes += block_bytes[b];
      ++out.method_calls;
    }
    centroids = kernels::kmeans_reduce(partials, centroids);
  }
  out.compute_ns = since(t0);
  out.compute_wire = s.counters().wire - w0;
  out.summary = std::move(centroids);
  out.output_bytes = payload_size_bytes(out.summary);
}

// Operands A and B in row-major grid order.
void persist_matrices(const AppParams& p, Session& s, AppOutcome& out,
                      std::vector<ObjectId>& a, std::vector<ObjectId>& b) {
  const std::uint64_t g = p.matrix.grid();
  for (int which = 0; which < 2; ++which) {
    auto& ids = which == 0 ? a : b;
    for (std::uint64_t r = 0; r < g; ++r) {
      for (std::uint64_t c = 0; c < g; ++c) {
        auto t0 = Clock::now();
        BlockPayload block = kernels::gen_matrix_block(p.seed + which, p.matrix, r, c);
        out.generate_ns += since(t0);
        t0 = Clock::now();
        ids.push_back(s.make_persistent(kMatrixClass, block, p.tier));
        out.persist_ns += since(t0);
        out.dataset_bytes += payload_size_bytes(block);
      }
    }
  }
  out.input_ids = a;
  out.input_ids.insert(out.input_ids.end(), b.begin(), b.end());
}

// Stores a client-computed output block according to the placement.
void keep_output(const AppParams& p, Session& s, AppOutcome& out, BlockPayload block) {
  out.output_bytes += payload_size_bytes(block);
  switch (p.result) {
    case ResultMode::kVolatile:
      out.output_ids.push_back(s.make_persistent(kMatrixClass, block, TierKind::kDram));
      break;
    case ResultMode::kStore:
      out.output_ids.push_back(s.make_persistent(kMatrixClass, block, p.tier));
      break;
    default:
      out.matrix.push_back(std::move(block));
      break;
  }
}

// Records an INVOKE result: by-value payloads are kept, ids are outputs.
void keep_remote_output(AppOutcome& out, InvokeResult r, std::uint64_t block_bytes) {
  out.output_bytes += block_bytes;
  if (auto* id = std::get_if<ObjectId>(&r)) {
    out.output_ids.push_back(*id);
  } else {
    out.matrix.push_back(std::move(std::get<BlockPayload>(r)));
  }
}

void run_matadd(const AppParams& p, Session& s, AppOutcome& out) {
  std::vector<ObjectId> a, b;
  persist_matrices(p, s, out, a, b);
  const std::uint64_t block_bytes = p.matrix.k * p.matrix.k * 8;
  const ResultPlacement placement = placement_for(p);

  if (p.on_compute_begin) p.on_compute_begin();
  auto w0 = s.counters().wire;
  auto t0 = Clock::now();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (p.mode == Mode::kActive) {
      std::array<InvokeArg, 1> args{b[i]};
      keep_remote_output(out, s.invoke(a[i], "add", args, placement), block_bytes);
    } else {
      BlockPayload x = s.fetch_full(a[i]);
      BlockPayload y = s.fetch_full(b[i]);
      BlockPayload sum;
      {
        MethodTimer timer(out);
        sum = kernels::matadd_block(PayloadView::of(x), PayloadView::of(y));
      }
      keep_output(p, s, out, std::move(sum));
    }
    out.method_input_bytes += 2 * block_bytes;
    ++out.method_calls;
  }
  out.compute_ns = since(t0);
  out.compute_wire = s.counters().wire - w0;
}

void run_matmul(const AppParams& p, Session& s, AppOutcome& out) {
  std::vector<ObjectId> a, b;
  persist_matrices(p, s, out, a, b);
  const std::uint64_t g = p.matrix.grid();
  const std::uint64_t k = p.matrix.k;
  const std::uint64_t block_bytes = k * k * 8;
  const ResultPlacement placement = placement_for(p);
  const BlockPayload zero = BlockPayload::submatrix(k, std::vector<double>(k * k, 0.0));

  std::vector<ObjectId> acc_ids;
  if (p.result == ResultMode::kInPlaceFma) {
    auto t0 = Clock::now();
    for (std::uint64_t i = 0; i < g * g; ++i) {
      acc_ids.push_back(s.make_persistent(kMatrixClass, zero, p.tier));
    }
    out.persist_ns += since(t0);
  }

  if (p.on_compute_begin) p.on_compute_begin();
  auto w0 = s.counters().wire;
  auto t0 = Clock::now();
  for (std::uint64_t i = 0; i < g; ++i) {
    for (std::uint64_t j = 0; j < g; ++j) {
      if (p.mode == Mode::kPassive) {
        BlockPayload acc = zero;
        for (std::uint64_t t = 0; t < g; ++t) {
          BlockPayload x = s.fetch_full(a[i * g + t]);
          BlockPayload y = s.fetch_full(b[t * g + j]);
          MethodTimer timer(out);
          kernels::matmul_accumulate(acc.values, x.values, y.values, k);
          out.method_input_bytes += 2 * block_bytes;
          ++out.method_calls;
        }
        keep_output(p, s, out, std::move(acc));
        continue;
      }
      if (p.result == ResultMode::kInPlaceFma) {
        const ObjectId& acc = acc_ids[i * g + j];
        for (std::uint64_t t = 0; t < g; ++t) {
          std::array<InvokeArg, 2> args{a[i * g + t], b[t * g + j]};
          s.invoke(acc, "fma_in_place", args);
          out.method_input_bytes += 2 * block_bytes;
          ++out.method_calls;
        }
        out.output_ids.push_back(acc);
        out.output_bytes += block_bytes;
        continue;
      }
      InvokeArg acc = zero;
      InvokeResult r;
      for (std::uint64_t t = 0; t < g; ++t) {
        std::array<InvokeArg, 2> args{b[t * g + j], acc};
        r = s.invoke(a[i * g + t], "fma", args, placement);
        if (const auto* prev = std::get_if<ObjectId>(&acc)) s.delete_object(*prev);
        if (auto* id = std::get_if<ObjectId>(&r)) {
          acc = *id;
        } else {
          acc = std::get<BlockPayload>(r);
        }
        out.method_input_bytes += 2 * block_bytes;
        ++out.method_calls;
      }
      keep_remote_output(out, std::move(r), block_bytes);
    }
  }
  out.compute_ns = since(t0);
  out.compute_wire = s.counters().wire - w0;
}

}  // namespace

std::string_view app_name(App a) { return name_of(a, kApps); }
std::string_view mode_name(Mode m) { return name_of(m, kModes); }
std::string_view result_mode_name(ResultMode r) { return name_of(r, kResults); }
std::string_view dataset_name(DatasetSize d) { return name_of(d, kDatasets); }
std::string_view object_size_name(ObjectSize o) { return name_of(o, kObjects); }
std::optional<App> parse_app(std::string_view s) { return parse_named(s, kApps); }
std::optional<Mode> parse_mode(std::string_view s) { return parse_named(s, kModes); }
std::optional<ResultMode> parse_result_mode(std::string_view s) { return parse_named(s, kResults); }
std::optional<DatasetSize> parse_dataset(std::string_view s) { return parse_named(s, kDatasets); }
std::optional<ObjectSize> parse_object_size(std::string_view s) { return parse_named(s, kObjects); }

std::uint64_t dataset_profile_bytes(DatasetSize d) {
  switch (d) {
    case DatasetSize::kDesk: return 16 * kMiB;
    case DatasetSize::kSmall: return 256 * kMiB;
    case DatasetSize::kBig: return 2048 * kMiB;
  }
  return 0;
}

std::uint64_t object_profile_bytes(ObjectSize o) {
  return o == ObjectSize::kBig ? 8 * kMiB : 1 * kMiB;
}

std::uint64_t matrix_profile_side(DatasetSize d) {
  switch (d) {
    case DatasetSize::kDesk: return 336;
    case DatasetSize::kSmall: return 2016;
    case DatasetSize::kBig: return 4032;
  }
  return 0;
}

AppParams AppParams::profile(App app, DatasetSize dataset, ObjectSize objects) {
  AppParams p;
  p.app = app;
  const std::uint64_t data = dataset_profile_bytes(dataset);
  const std::uint64_t obj = object_profile_bytes(objects);
  switch (app) {
    case App::kHistogram:
      p.hist_elements = data / 8;
      p.hist_block_elems = obj / 8;
      break;
    case App::kKMeans:
      p.km_block_rows = obj / (p.km.dims * 8);
      p.km_points = (data / obj) * p.km_block_rows;
      break;
    case App::kMatAdd:
    case App::kMatMul: {
      std::uint64_t n = matrix_profile_side(dataset);
      p.matrix = {n, n / (objects == ObjectSize::kBig ? 6 : 42)};
      break;
    }
  }
  return p;
}

std::uint64_t AppParams::input_objects() const {
  switch (app) {
    case App::kHistogram:
      return hist_block_elems == 0 ? 0 : (hist_elements + hist_block_elems - 1) / hist_block_elems;
    case App::kKMeans:
      return km_block_rows == 0 ? 0 : (km_points + km_block_rows - 1) / km_block_rows;
    case App::kMatAdd:
    case App::kMatMul:
      return 2 * matrix.grid() * matrix.grid();
  }
  return 0;
}

std::uint64_t AppParams::dataset_bytes() const {
  switch (app) {
    case App::kHistogram: return hist_elements * 8;
    case App::kKMeans: return km_points * km.dims * 8;
    case App::kMatAdd:
    case App::kMatMul: return 2 * matrix.n * matrix.n * 8;
  }
  return 0;
}

std::uint64_t AppParams::expected_reuse() const {
  switch (app) {
    case App::kKMeans: return km.iterations;
    case App::kMatMul: return matrix.grid();
    default: return 1;
  }
}

void AppParams::validate() const {
  if (result == ResultMode::kInPlaceFma && app != App::kMatMul) {
    invalid("result inplace_fma requires app matmul");
  }
  if (result == ResultMode::kInPlaceFma && mode != Mode::kActive) {
    invalid("result inplace_fma requires mode active");
  }
  if ((result == ResultMode::kVolatile || result == ResultMode::kStore) && !is_matrix(app)) {
    invalid("result " + std::string(result_mode_name(result)) +
            " requires a matrix app (matadd or matmul)");
  }
  switch (app) {
    case App::kHistogram:
      if (hist_elements == 0 || hist_block_elems == 0) invalid("histogram sizes must be positive");
      break;
    case App::kKMeans:
      km.validate();
      if (km_points == 0 || km_block_rows == 0) invalid("k-means sizes must be positive");
      if (km_points < km.centers) invalid("k-means needs at least as many points as centers");
      break;
    case App::kMatAdd:
    case App::kMatMul:
      matrix.validate();
      break;
  }
}

void register_kernel_classes(Session& session) {
  using kernels::routine::kFma;
  using kernels::routine::kFmaInPlace;
  using kernels::routine::kHistogram;
  using kernels::routine::kKMeansPartial;
  using kernels::routine::kMatAdd;
  using kernels::routine::kMean;
  const std::vector<ClassDescriptor> classes{
      {kArrayClass, {{"values", TypeTag::kFloatArray}}, {"histogram", "mean"}},
      {kPointsClass, {{"points", TypeTag::kPointsBlock}}, {"partial"}},
      {kMatrixClass, {{"block", TypeTag::kSubmatrix}}, {"add", "fma", "fma_in_place"}},
  };
  const std::vector<MethodDescriptor> methods{
      {kArrayClass, "histogram", kHistogram, {}, TypeTag::kHistogram, false},
      {kArrayClass, "mean", kMean, {}, TypeTag::kScalar, false},
      {kPointsClass, "partial", kKMeansPartial, {TypeTag::kCentroids}, TypeTag::kPartialSum, false},
      {kMatrixClass, "add", kMatAdd, {TypeTag::kSubmatrix}, TypeTag::kSubmatrix, false},
      {kMatrixClass, "fma", kFma, {TypeTag::kSubmatrix, TypeTag::kSubmatrix}, TypeTag::kSubmatrix,
       false},
      {kMatrixClass, "fma_in_place", kFmaInPlace, {TypeTag::kSubmatrix, TypeTag::kSubmatrix},
       TypeTag::kNone, true},
  };
  for (const auto& c : classes) ignore_existing([&] { session.register_class(c); });
  for (const auto& m : methods) ignore_existing([&] { session.register_method(m); });
}

AppOutcome run_app(const AppParams& params, Session& session) {
  params.validate();
  register_kernel_classes(session);
  AppOutcome out;
  switch (params.app) {
    case App::kHistogram: run_histogram(params, session, out); break;
    case App::kKMeans: run_kmeans(params, session, out); break;
    case App::kMatAdd: run_matadd(params, session, out); break;
    case App::kMatMul: run_matmul(params, session, out); break;
  }
  if (params.collect_output && is_matrix(params.app) && !out.output_ids.empty()) {
    out.matrix.clear();
    for (const auto& id : out.output_ids) out.matrix.push_back(session.fetch_full(id));
  }
  return out;
}

}  // namespace aos::apps
