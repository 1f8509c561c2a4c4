#include "mcnet/reaction_network.hpp"

namespace mcnet {

namespace {

JumpChannel transfer(ChannelKind kind, double rate, std::size_t from, std::size_t to) {
  JumpChannel c;
  c.kind = kind;
  c.rate = rate;
  c.reactants = {from, kNoSpecies};
  c.change = {{from, -1}, {to, +1}};
  return c;
}

}  // namespace

std::vector<long> ReactionNetwork::initialState() const {
  std::vector<long> q(speciesCount, 0);
  for (const auto& s : sites) {
    if (s.enzymeSpecies != kNoSpecies) q[s.enzymeSpecies] = s.enzymes;
  }
  return q;
}

ReactionNetwork buildNetwork(const NetworkSpec& spec) {
  validate(spec);
  ReactionNetwork net;
  const auto& lat = spec.lattice;
  net.lattice = lat;
  net.voxelCount = lat.voxelCount();
  std::size_t next = net.voxelCount;

  const double hop = jumpRate(lat);
  for (std::size_t n = 0; n < net.voxelCount; ++n) {
    for (const auto& w : neighbors(lat.voxel(n), lat)) {
      net.channels.push_back(transfer(ChannelKind::diffusion, hop, n, lat.index(w)));
    }
  }

  const double volume = lat.delta * lat.delta * lat.delta;
  net.receiverSites.resize(spec.receivers.size());
  for (std::size_t u = 0; u < spec.receivers.size(); ++u) {
    const auto& rx = spec.receivers[u];
    // k+ belongs to the whole device; each of its voxels binds at k+/(n_vox Delta^3).
    const double siteVolume = volume * static_cast<double>(rx.voxels.size());
    const auto* mm = std::get_if<MichaelisMenten>(&rx.kinetics);
    std::vector<long> enzymeSplit;
    if (mm) enzymeSplit = splitUniform(mm->eTotal, rx.voxels);

    for (std::size_t m = 0; m < rx.voxels.size(); ++m) {
      ReceiverSite site;
      site.receiver = u;
      site.voxel = rx.voxels[m];
      site.freeSpecies = lat.index(rx.voxels[m]);
      site.complexSpecies = next++;
      if (mm) {
        site.enzymeSpecies = next++;
        site.intermediateSpecies = next++;
        site.enzymes = enzymeSplit[m];
      }
      net.receiverSites[u].push_back(net.sites.size());
      net.sites.push_back(site);

      if (!mm) {
        net.channels.push_back(transfer(ChannelKind::bind, rx.kPlus / siteVolume, site.freeSpecies, site.complexSpecies));
        net.channels.push_back(transfer(ChannelKind::unbind, rx.kMinus, site.complexSpecies, site.freeSpecies));
        continue;
      }
      // Second order in (L, E) within one voxel. Splitting the enzymes over the
      // device already divides the effective linear rate by n_vox.
      JumpChannel bindMM;
      bindMM.kind = ChannelKind::mmBind;
      bindMM.rate = mm->g1plus / volume;
      bindMM.reactants = {site.freeSpecies, site.enzymeSpecies};
      bindMM.change = {{site.freeSpecies, -1}, {site.enzymeSpecies, -1}, {site.intermediateSpecies, +1}};
      net.channels.push_back(bindMM);

      JumpChannel unbindMM;
      unbindMM.kind = ChannelKind::mmUnbind;
      unbindMM.rate = mm->g1minus;
      unbindMM.reactants = {site.intermediateSpecies, kNoSpecies};
      unbindMM.change = {{site.intermediateSpecies, -1}, {site.freeSpecies, +1}, {site.enzymeSpecies, +1}};
      net.channels.push_back(unbindMM);

      JumpChannel catalysis;
      catalysis.kind = ChannelKind::mmCatalysis;
      catalysis.rate = mm->g2;
      catalysis.reactants = {site.intermediateSpecies, kNoSpecies};
      catalysis.change = {{site.intermediateSpecies, -1}, {site.complexSpecies, +1}, {site.enzymeSpecies, +1}};
      net.channels.push_back(catalysis);

      net.channels.push_back(transfer(ChannelKind::mmRelease, mm->g3, site.complexSpecies, site.freeSpecies));
    }
  }
  net.speciesCount = next;

  for (const auto& tx : spec.transmitters) {
    std::vector<std::size_t> species;
    for (const auto& v : tx.voxels) species.push_back(lat.index(v));
    net.transmitterSpecies.push_back(std::move(species));
    net.transmitterVoxels.push_back(tx.voxels);
  }
  return net;
}

std::vector<JumpChannel> buildChannels(const NetworkSpec& spec) { return buildNetwork(spec).channels; }

}  // namespace mcnet
