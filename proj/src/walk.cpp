#include "thickpoints/walk.hpp"

#include "thickpoints/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace thickpoints::walk {

std::uint64_t WalkSample::steps() const {
    if (path) return path->size() - 1;
    std::uint64_t s = 0;
    for (const auto& v : visits) s += v.visits;
    return s;
}

const VisitRecord* WalkSample::find(std::int32_t site) const {
    auto it = std::lower_bound(visits.begin(), visits.end(), site,
                               [](const VisitRecord& v, std::int32_t s) { return v.site < s; });
    return (it != visits.end() && it->site == site) ? &*it : nullptr;
}

double WalkSample::local_time(std::int32_t site) const {
    const auto* v = find(site);
    return v ? v->local_time : 0.0;
}

std::uint32_t WalkSample::visit_count(std::int32_t site) const {
    const auto* v = find(site);
    return v ? v->visits : 0;
}

double WalkSample::total_time() const {
    double t = 0.0;
    for (const auto& v : visits) t += v.local_time;
    return t;
}

void WalkScratch::prepare(std::size_t n_sites) {
    if (counts.size() != n_sites) {
        counts.assign(n_sites, 0);
        time.assign(n_sites, 0.0);
    }
    touched.clear();
    path.clear();
    holding.clear();
}

namespace {

double quantized_exponential(Rng& rng) {
    const double e = rng.exponential();
    return (std::floor(e * 0x1.0p32) + 0.5) * 0x1.0p-32;
}

// Runs the jump chain on the bounding-box grid of the domain, with
// `choose(cell)` returning a direction, then turns visit counts into local
// times.
template <class Choose>
WalkSample run_walk(const LatticeDomain& ld, std::int32_t start, Rng& rng, const WalkOptions& opts,
                    WalkScratch* scratch, Choose&& choose) {
    if (!ld.is_interior(start)) throw std::invalid_argument("walk must start at an interior site");
    WalkScratch local;
    WalkScratch& sc = scratch ? *scratch : local;
    sc.prepare(ld.grid_cells());

    const std::int32_t h = ld.grid_height();
    const std::array<std::int32_t, 4> offset = {h, -h, 1, -1};
    const std::uint8_t* state = ld.cell_state().data();
    std::int32_t cur = ld.cell_of(start);
    std::uint64_t steps = 0;
    while (state[cur] == 1) {
        if (++steps > opts.max_steps) {
            for (std::int32_t c : sc.touched) {
                sc.counts[static_cast<std::size_t>(c)] = 0;
                sc.time[static_cast<std::size_t>(c)] = 0.0;
            }
            throw RunawayWalkError("walk exceeded its step cap without reaching the boundary");
        }
        auto& c = sc.counts[static_cast<std::size_t>(cur)];
        if (c++ == 0) sc.touched.push_back(cur);
        if (opts.store_path) sc.path.push_back(ld.site_at_cell(cur));
        if (opts.explicit_holding) {
            const double t = quantized_exponential(rng);
            sc.time[static_cast<std::size_t>(cur)] += t;
            if (opts.store_path) sc.holding.push_back(t);
        }
        cur += offset[static_cast<std::size_t>(choose(cur))];
    }

    WalkSample ws;
    ws.domain = &ld;
    ws.start = start;
    ws.exit = ld.site_at_cell(cur);
    ws.stream = rng.stream();
    if (sc.touched.size() > ld.grid_cells() / 32) {
        // Dense scan beats sorting once a sizeable fraction of cells is touched.
        std::size_t k = 0;
        for (std::size_t c = 0; c < ld.grid_cells(); ++c)
            if (sc.counts[c] != 0) sc.touched[k++] = static_cast<std::int32_t>(c);
    } else {
        std::sort(sc.touched.begin(), sc.touched.end());
    }
    ws.visits.reserve(sc.touched.size());
    for (std::int32_t cell : sc.touched) {
        auto& c = sc.counts[static_cast<std::size_t>(cell)];
        auto& t = sc.time[static_cast<std::size_t>(cell)];
        const double lt = opts.explicit_holding ? t : rng.gamma(c);
        ws.visits.push_back({ld.site_at_cell(cell), c, lt});
        c = 0;
        t = 0.0;
    }
    if (opts.store_path) {
        sc.path.push_back(ws.exit);
        ws.path = sc.path;
        if (opts.explicit_holding) ws.holding = sc.holding;
    }
    return ws;
}

} // namespace

WalkSample sample_walk(const LatticeDomain& ld, std::int32_t start, Rng& rng, const WalkOptions& opts,
                       WalkScratch* scratch) {
    std::uint64_t bits = 0;
    int left = 0;
    return run_walk(ld, start, rng, opts, scratch, [&](std::int32_t) {
        if (left == 0) {
            bits = rng.next_u64();
            left = 32;
        }
        const int d = static_cast<int>(bits & 3u);
        bits >>= 2;
        --left;
        return d;
    });
}

WalkSample sample_conditioned_walk(const LatticeDomain& ld, std::int32_t start, std::int32_t exit_target,
                                   const lattice::PotentialField& h_field, Rng& rng, const WalkOptions& opts,
                                   WalkScratch* scratch) {
    if (h_field.values.size() != ld.size()) throw std::invalid_argument("h field belongs to a different domain");
    if (!ld.is_boundary(exit_target)) throw std::invalid_argument("conditioning target must be a boundary site");
    if (!(h_field[start] > 0.0)) throw DomainError("conditioning target is unreachable from the start site");
    const auto& hv = h_field.values;
    const std::int32_t gh = ld.grid_height();
    const std::array<std::int32_t, 4> offset = {gh, -gh, 1, -1};
    auto ws = run_walk(ld, start, rng, opts, scratch, [&](std::int32_t cell) {
        std::array<double, 4> w{};
        double total = 0.0;
        for (std::size_t d = 0; d < 4; ++d) {
            const std::int32_t y = ld.site_at_cell(cell + offset[d]);
            double v = hv[static_cast<std::size_t>(y)];
            if (ld.is_boundary(y) && y != exit_target) v = 0.0;
            w[d] = std::max(v, 0.0);
            total += w[d];
        }
        const double u = rng.uniform() * total;
        double acc = 0.0;
        for (int d = 0; d < 3; ++d) {
            acc += w[static_cast<std::size_t>(d)];
            if (u <= acc && w[static_cast<std::size_t>(d)] > 0.0) return d;
        }
        return 3;
    });
    ws.conditioned = true;
    return ws;
}

double excursion_q(int N, int R) {
    return std::log(static_cast<double>(N) / R) / std::log(static_cast<double>(N));
}

ExcursionSampler::ExcursionSampler(const LatticeDomain& ld, Site x, int R, TruncatedExcursion convention)
    : ld_(&ld), x_(x), R_(R), convention_(convention) {
    if (R < 1) throw std::invalid_argument("excursion radius must be positive");
    const std::int32_t xi = ld.index_of(x);
    if (xi != LatticeDomain::kNone) x_cell_ = ld.cell_of(xi);
    contour_.assign(ld.grid_cells(), 0);
    bool meets = false;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(ld.size()); ++i) {
        const Site& s = ld.site(i);
        if (std::max(std::abs(s.x - x.x), std::abs(s.y - x.y)) == R) {
            contour_[static_cast<std::size_t>(ld.cell_of(i))] = 1;
            meets = true;
        }
    }
    if (!meets) throw std::invalid_argument("contour C_R(x) does not meet the domain");
}

ExcursionStats ExcursionSampler::sample(std::int32_t start, Rng& rng, std::uint64_t max_steps) const {
    const auto& ld = *ld_;
    if (!ld.is_interior(start)) throw std::invalid_argument("walk must start at an interior site");
    ExcursionStats st;
    st.center = x_;
    st.radius = R_;
    st.q = excursion_q(ld.scale(), R_);

    const std::int32_t h = ld.grid_height();
    const std::array<std::int32_t, 4> offset = {h, -h, 1, -1};
    const std::uint8_t* state = ld.cell_state().data();
    const std::uint8_t* contour = contour_.data();
    std::vector<std::uint32_t> visits;
    std::uint32_t open = 0; // visits in the running excursion, 0 when none is open
    std::int32_t cur = ld.cell_of(start);
    std::uint64_t steps = 0, bits = 0;
    int left = 0;
    while (state[cur] == 1) {
        if (++steps > max_steps) throw RunawayWalkError("walk exceeded its step cap without reaching the boundary");
        if (cur == x_cell_) {
            ++open;
        } else if (open && contour[cur]) {
            visits.push_back(open);
            open = 0;
        }
        if (left == 0) {
            bits = rng.next_u64();
            left = 32;
        }
        cur += offset[bits & 3u];
        bits >>= 2;
        --left;
    }
    if (open && contour[cur]) {
        visits.push_back(open);
    } else if (open && convention_ == TruncatedExcursion::Count) {
        visits.push_back(open);
    }
    st.count = static_cast<std::uint32_t>(visits.size());
    st.local_times.reserve(visits.size());
    for (std::uint32_t k : visits) st.local_times.push_back(rng.gamma(k));
    return st;
}

namespace {

bool on_contour(const Site& s, const Site& x, int R) {
    return std::max(std::abs(s.x - x.x), std::abs(s.y - x.y)) == R;
}

void require_contour(const LatticeDomain& ld, Site x, int R) {
    if (R < 1) throw std::invalid_argument("excursion radius must be positive");
    for (int t = -R; t <= R; ++t) {
        if (ld.contains({x.x + t, x.y - R}) || ld.contains({x.x + t, x.y + R}) || ld.contains({x.x - R, x.y + t}) ||
            ld.contains({x.x + R, x.y + t}))
            return;
    }
    throw std::invalid_argument("contour C_R(x) does not meet the domain");
}

template <class OnVisit, class OnClose>
void scan_excursions(std::span<const std::int32_t> path, const LatticeDomain& ld, Site x, int R,
                     OnVisit&& on_visit, OnClose&& on_close, TruncatedExcursion convention) {
    const std::int32_t xi = ld.index_of(x);
    if (xi == LatticeDomain::kNone) return;
    bool open = false;
    const std::size_t T = path.size() - 1;
    for (std::size_t i = 0; i <= T; ++i) {
        const std::int32_t s = path[i];
        if (s == xi && i < T) {
            open = true;
            on_visit(i);
        } else if (open && on_contour(ld.site(s), x, R)) {
            on_close();
            open = false;
        }
    }
    if (open && convention == TruncatedExcursion::Count) on_close();
}

} // namespace

std::uint32_t excursion_count(std::span<const std::int32_t> path, const LatticeDomain& ld, Site x, int R,
                              TruncatedExcursion convention) {
    std::uint32_t n = 0;
    scan_excursions(path, ld, x, R, [](std::size_t) {}, [&] { ++n; }, convention);
    return n;
}

ExcursionStats count_excursions(const WalkSample& ws, Site x, int R, TruncatedExcursion convention) {
    if (!ws.path) throw std::invalid_argument("count_excursions needs a stored path");
    if (!ws.holding) throw std::invalid_argument("count_excursions needs explicit holding times");
    const auto& ld = *ws.domain;
    require_contour(ld, x, R);
    ExcursionStats st;
    st.center = x;
    st.radius = R;
    st.q = excursion_q(ld.scale(), R);
    double acc = 0.0;
    scan_excursions(
        *ws.path, ld, x, R, [&](std::size_t i) { acc += (*ws.holding)[i]; },
        [&] {
            st.local_times.push_back(acc);
            acc = 0.0;
        },
        convention);
    st.count = static_cast<std::uint32_t>(st.local_times.size());
    return st;
}

std::vector<int> good_event_radii(int N, double a, double eps) {
    const double lo = std::pow(static_cast<double>(N), 0.5 - a / 4.0);
    const double hi = eps * N;
    std::vector<int> out;
    for (long long R = 1; R <= static_cast<long long>(hi) && R <= N; R *= 2)
        if (static_cast<double>(R) >= lo * (1.0 - 1e-12)) out.push_back(static_cast<int>(R));
    return out;
}

double good_event_threshold(int N, int R, double b) {
    const double q = excursion_q(N, R);
    return 0.5 * b * (1.0 + q) / (1.0 - q) * std::log(static_cast<double>(N) / R);
}

GoodEventResult good_event(const WalkSample& ws, Site x, double a, double b, double eps, int N) {
    if (!(b > a)) throw std::invalid_argument("good event needs b > a");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("good event needs eps in (0,1)");
    if (!ws.path) throw std::invalid_argument("good_event needs a stored path");
    GoodEventResult res;
    const auto radii = good_event_radii(N, a, eps);
    res.vacuous = radii.empty();
    for (int R : radii) {
        GoodEventScale sc;
        sc.R = R;
        sc.count = excursion_count(*ws.path, *ws.domain, x, R);
        sc.threshold = good_event_threshold(N, R, b);
        sc.ok = static_cast<double>(sc.count) <= sc.threshold;
        res.good = res.good && sc.ok;
        res.scales.push_back(sc);
    }
    return res;
}

namespace {

WalkSample piece(const WalkSample& ws, std::size_t begin, std::size_t end) {
    const auto& path = *ws.path;
    const auto& hold = *ws.holding;
    WalkSample out;
    out.domain = ws.domain;
    out.start = path[begin];
    out.exit = path[end];
    out.stream = ws.stream;
    out.conditioned = ws.conditioned;
    std::map<std::int32_t, VisitRecord> acc;
    for (std::size_t i = begin; i < end; ++i) {
        auto& v = acc[path[i]];
        v.site = path[i];
        ++v.visits;
        v.local_time += hold[i];
    }
    out.visits.reserve(acc.size());
    for (const auto& [s, v] : acc) out.visits.push_back(v);
    out.path.emplace(path.begin() + static_cast<std::ptrdiff_t>(begin), path.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    out.holding.emplace(hold.begin() + static_cast<std::ptrdiff_t>(begin), hold.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

} // namespace

SplitResult split_at_first_exit(const WalkSample& ws, const LatticeDomain& sub) {
    if (!ws.path || !ws.holding) throw std::invalid_argument("split needs a stored path with explicit holding times");
    const auto& ld = *ws.domain;
    const auto& path = *ws.path;
    if (!sub.is_interior(sub.index_of(ld.site(ws.start))))
        throw std::invalid_argument("walk start is not interior to the sub-domain");
    std::size_t k = 0;
    while (k + 1 < path.size() && sub.is_interior(sub.index_of(ld.site(path[k])))) ++k;
    SplitResult r;
    r.split_step = k;
    r.split_site = path[k];
    r.first = piece(ws, 0, k);
    r.second = piece(ws, k, path.size() - 1);
    return r;
}

std::vector<StripPiece> strip_decomposition(const LatticeDomain& ld, const WalkSample& ws, int p) {
    if (!ws.path) throw std::invalid_argument("strip decomposition needs a stored path");
    if (p < 0) throw std::invalid_argument("strip level must be nonnegative");
    const double h = std::ldexp(1.0, -p);
    const double N = ld.scale();
    if (!(h * N > 1.0)) throw std::invalid_argument("strips narrower than the lattice spacing");
    const auto& path = *ws.path;

    std::map<long long, std::vector<std::shared_ptr<const LatticeDomain>>> cache;
    auto strip_for = [&](long long k, Site anchor) {
        auto& list = cache[k];
        for (const auto& d : list)
            if (d->contains(anchor)) return d;
        list.push_back(std::make_shared<const LatticeDomain>(lattice::strip_subdomain(ld, k * h, h, anchor)));
        return list.back();
    };

    std::vector<StripPiece> pieces;
    long long k = static_cast<long long>(std::floor(ld.site(path[0]).x / N / h));
    std::size_t pos = 0;
    for (;;) {
        const Site anchor = ld.site(path[pos]);
        auto dom = strip_for(k, anchor);
        std::size_t j = pos;
        while (j + 1 < path.size() && dom->is_interior(dom->index_of(ld.site(path[j])))) ++j;
        pieces.push_back({k * h, dom, path[pos], path[j], pos, j});
        if (ld.is_boundary(path[j]) || j + 1 == path.size()) break;
        const Site y = ld.site(path[j]);
        k += ((y.x + 1) / N - k * h >= h) ? 1 : -1;
        pos = j;
    }
    return pieces;
}

namespace {

void put_varint(std::ostream& os, std::uint64_t v) {
    while (v >= 0x80) {
        os.put(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    os.put(static_cast<char>(v));
}

std::uint64_t get_varint(std::istream& is) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        const int c = is.get();
        if (c == EOF) throw std::runtime_error("path dump: truncated varint");
        v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
        if (!(c & 0x80)) return v;
    }
    throw std::runtime_error("path dump: overlong varint");
}

std::uint64_t zigzag(std::int64_t v) { return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63); }
std::int64_t unzigzag(std::uint64_t v) { return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1); }

constexpr char kPathMagic[4] = {'T', 'P', 'W', 'K'};
constexpr std::uint8_t kPathVersion = 1;

} // namespace

void write_path(std::ostream& os, const WalkSample& ws) {
    if (!ws.path) throw std::invalid_argument("path dump needs a stored path");
    os.write(kPathMagic, 4);
    os.put(static_cast<char>(kPathVersion));
    put_varint(os, ws.path->size());
    Site prev{0, 0};
    for (std::int32_t i : *ws.path) {
        const Site s = ws.domain->site(i);
        put_varint(os, zigzag(s.x - prev.x));
        put_varint(os, zigzag(s.y - prev.y));
        prev = s;
    }
}

std::vector<Site> read_path(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kPathMagic)) throw std::runtime_error("path dump: bad magic");
    const int version = is.get();
    if (version != kPathVersion) throw std::runtime_error("path dump: unsupported version");
    const std::uint64_t n = get_varint(is);
    std::vector<Site> out;
    out.reserve(n);
    Site prev{0, 0};
    for (std::uint64_t i = 0; i < n; ++i) {
        prev.x += static_cast<int>(unzigzag(get_varint(is)));
        prev.y += static_cast<int>(unzigzag(get_varint(is)));
        out.push_back(prev);
    }
    return out;
}

} // namespace thickpoints::walk
