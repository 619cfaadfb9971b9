#include <doctest.h>

#include <cmath>

#include "fracdiff/datasets.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/metrics.hpp"

using namespace fracdiff;

namespace {

Eigen::MatrixXd normals(Eigen::Index n, int d, std::uint64_t seed, double shift = 0.0) {
  Engine e = make_engine(seed);
  StandardNormal z;
  Eigen::MatrixXd p(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int k = 0; k < d; ++k) p(r, k) = z(e) + shift;
  }
  return p;
}

// Straight double loop over the definition.
PrecisionRecall brute_pr(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, int k) {
  auto radii = [k](const Eigen::MatrixXd& s) {
    std::vector<double> r(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      std::vector<double> d;
      for (Eigen::Index j = 0; j < s.rows(); ++j) {
        if (j != i) d.push_back((s.row(i) - s.row(j)).norm());
      }
      std::sort(d.begin(), d.end());
      r[i] = d[k - 1];
    }
    return r;
  };
  auto covered = [](const Eigen::MatrixXd& ref, const std::vector<double>& rad, const Eigen::MatrixXd& q) {
    double hit = 0.0;
    for (Eigen::Index a = 0; a < q.rows(); ++a) {
      for (Eigen::Index b = 0; b < ref.rows(); ++b) {
        if ((q.row(a) - ref.row(b)).norm() <= rad[b]) {
          hit += 1.0;
          break;
        }
      }
    }
    return hit / q.rows();
  };
  return {covered(real, radii(real), gen), covered(gen, radii(gen), real)};
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("sliced Wasserstein") {
    const auto a = normals(500, 2, 1);
    Engine e = make_engine(1);
    CHECK(sliced_wasserstein(a, a, 64, e) == 0.0);

    const auto x = normals(100000, 1, 2), y = normals(100000, 1, 3, 0.5);
    Engine e1 = make_engine(4);
    CHECK(std::abs(sliced_wasserstein(x, y, 4, e1) - 0.5) <= 0.02);

    const auto b = normals(500, 2, 5, 0.3);
    Engine s1 = make_engine(9), s2 = make_engine(9);
    CHECK(sliced_wasserstein(a, b, 32, s1) == doctest::Approx(sliced_wasserstein(b, a, 32, s2)).epsilon(1e-12));

    Engine e2 = make_engine(1);
    CHECK_THROWS_AS(sliced_wasserstein(a, normals(10, 3, 1), 8, e2), Error);
  }

  TEST_CASE("precision and recall") {
    const auto real = half_moons(200, 0.08, 1).points;
    auto pr = improved_precision_recall(real, real, 3);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);

    Eigen::MatrixXd far = real.array() + 100.0;
    pr = improved_precision_recall(real, far, 3);
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 0.0);

    // mode collapse onto one real point
    Eigen::MatrixXd collapsed = real.row(7).replicate(50, 1);
    pr = improved_precision_recall(real, collapsed, 3);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall < 0.1);

    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto r = normals(40, 2, 10 + s), g = normals(50, 2, 20 + s, 0.4);
      const auto fast = improved_precision_recall(r, g, 3), slow = brute_pr(r, g, 3);
      CHECK(fast.precision == slow.precision);
      CHECK(fast.recall == slow.recall);
    }
    CHECK_THROWS_AS(improved_precision_recall(real.topRows(3), real, 3), Error);
  }

  TEST_CASE("Vendi score examples") {
    Eigen::MatrixXd same = Eigen::MatrixXd::Constant(10, 2, 0.4);
    for (auto k : {VendiKernel::Cosine, VendiKernel::Rbf}) {
      VendiOptions o;
      o.kernel = k;
      o.bandwidth = 1.0;
      CHECK(vendi_score(same, o) == doctest::Approx(1.0).epsilon(1e-9));
    }
    VendiOptions rbf;
    rbf.kernel = VendiKernel::Rbf;
    rbf.bandwidth = 0.1;
    Eigen::MatrixXd spread(6, 2);
    for (int r = 0; r < 6; ++r) spread.row(r) << 10.0 * r, -5.0 * r;
    CHECK(vendi_score(spread, rbf) == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(vendi_score(Eigen::MatrixXd::Identity(5, 5)) == doctest::Approx(5.0).epsilon(1e-12));

    Eigen::MatrixXd clusters = 1e-3 * normals(200, 2, 3);
    clusters.bottomRows(100).col(0).array() += 10.0;
    CHECK(std::abs(vendi_score(clusters, rbf) - 2.0) <= 0.05);
    Eigen::MatrixXd cos_clusters = clusters;
    cos_clusters.topRows(100).col(1).array() += 10.0;
    CHECK(std::abs(vendi_score(cos_clusters) - 2.0) <= 0.05);

    // merging the clusters lowers the score
    Eigen::MatrixXd merged = 1e-3 * normals(200, 2, 3);
    CHECK(vendi_score(merged, rbf) < vendi_score(clusters, rbf));
    CHECK_THROWS_AS(vendi_score(same.topRows(1)), Error);
  }

  TEST_CASE("permutation invariance and report") {
    const auto real = half_moons(300, 0.08, 1).points, gen = half_moons(300, 0.08, 2).points;
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(300);
    perm.setIdentity();
    Engine pe = make_engine(6);
    for (int i = 299; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[uniform(pe, 0.0, i + 0.999)]);
    const Eigen::MatrixXd shuffled = perm * gen;
    MetricConfig cfg;
    const auto a = evaluate(real, gen, cfg), b = evaluate(real, shuffled, cfg);
    CHECK(a.ip == b.ip);
    CHECK(a.ir == b.ir);
    CHECK(a.vs == doctest::Approx(b.vs).epsilon(1e-9));
    CHECK(a.wsd >= 0.0);
    CHECK(a.vs >= 1.0);
    CHECK(a.vs <= 300.0);
    const auto text = a.to_text();
    CHECK(text.find("row=WSD") != std::string::npos);
    CHECK(text.find("n_slices=256") != std::string::npos);

    const auto same = evaluate(real, real, cfg);
    CHECK(same.wsd == 0.0);
    CHECK(same.ip == 1.0);
    CHECK(same.ir == 1.0);
  }
}
