#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"
#include "lclab/slicing.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace lclab {

/// Text forms used by configs and the command line.
///
///   gaussian:s=1[,n=2][,mean=[0,1]]
///   uniform:box=[-1,1]x[0,2]
///   exponential
///   ball:n=2,r=1[,center=[0,0]]
///   simplex:n=2                      regular, volume one
///   product:(gaussian:s=1),(exponential)
///   tilt:base=(uniform:box=[-1,1]),t=1[,theta=0.2]
///   convolve:base=(..),s=0.5
///   regularize:base=(..),delta=0.1
///   isotropize:base=(..)
///   affine:base=(..),a=[[2,0],[0,1]],b=[0,1]
///   body:<body spec>                 uniform law on a body
///
/// Bodies: body:cube[:n=3], body:box:box=[0,1]x[0,2], body:ball[:n=3,r=1],
/// body:simplex[:n=3], body:hpoly:file=K.json or body:hpoly:h=[[nx,ny,c],..].
/// Any body accepts volume=1 to rescale about its centroid.
///
/// Grids: grid:box=[-8,8],n=4001[,rule=trapezoid|simpson|gauss]; n may be a
/// list with one count per axis.
///
/// Every parser throws SpecParseError with the offending spec in the message.
Density parse_density(std::string_view spec);
ConvexBody parse_body(std::string_view spec);
Grid parse_grid(std::string_view spec);
bool is_body_spec(std::string_view spec);

/// Splits at `sep` outside brackets and parentheses.
std::vector<std::string> split_top_level(std::string_view s, char sep);

}  // namespace lclab
